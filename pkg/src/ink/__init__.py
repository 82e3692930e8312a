"""Cloze-style API-name pop quizzes: generation, evaluation and reporting."""

__version__ = "0.1.0"

TOOL_VERSION = f"ink/{__version__}"
