#!/usr/bin/env python3
"""Regenerate the toy tokenizer profile fixtures.

Each profile is defined by a table of intended word splits; the vocabulary is
the union of the pieces plus single characters, tokenization is greedy
longest-prefix matching, and the script asserts that matching actually
reproduces every intended split before writing the JSON. Run from the
repository root:

    python scripts/make_toy_profiles.py
"""

import json
import string
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ink.tokvocab import TokenizerProfile  # noqa: E402

CHARS = list(string.ascii_lowercase + string.ascii_uppercase + string.digits + "_")

# Reference profile: splits identifiers into a few subword pieces.
ALPHA_SPLITS = {
    "numpy": ["num", "py"],
    "linalg": ["lin", "alg"],
    "multi_dot": ["multi", "_", "dot"],
    "qr": ["qr"],
    "ones": ["ones"],
    "zeros": ["zer", "os"],
    "pandas": ["pan", "das"],
    "DataFrame": ["Data", "Frame"],
    "from_records": ["from", "_", "records"],
    "matplotlib": ["mat", "plot", "lib"],
    "pyplot": ["py", "plot"],
    "savefig": ["save", "fig"],
    "plot": ["plot"],
    "collections": ["collect", "ions"],
    "OrderedDict": ["Ordered", "Dict"],
    "hashlib": ["hash", "lib"],
    "json": ["json"],
    "dumps": ["dump", "s"],
    "math": ["math"],
    "pi": ["pi"],
    "operator": ["oper", "ator"],
    "itemgetter": ["item", "getter"],
    "os": ["os"],
    "path": ["path"],
    "exists": ["exist", "s"],
    "isfile": ["is", "file"],
    "join": ["join"],
    "requests": ["request", "s"],
    "get": ["get"],
    "scipy": ["sci", "py"],
    "stats": ["stat", "s"],
    "norm": ["norm"],
    "sys": ["sys"],
    "exit": ["exit"],
    "tensorflow": ["tensor", "flow"],
    "compat": ["com", "pat"],
    "v2": ["v2"],
    "boolean_mask": ["boolean", "_", "mask"],
    "sha256": ["sha", "256"],
    "read_csv": ["read", "_", "csv"],
}

# Second profile: renders many identifiers as single tokens; its vocabulary
# deliberately drops some of alpha's piece tokens so the unified-vocabulary
# gate filters first and last masks asymmetrically.
BETA_SPLITS = {
    "numpy": ["numpy"],
    "linalg": ["linalg"],
    "qr": ["qr"],
    "pandas": ["pandas"],
    "json": ["json"],
    "math": ["math"],
    "os": ["os"],
    "path": ["path"],
    "join": ["join"],
    "get": ["get"],
    "norm": ["norm"],
    "sys": ["sys"],
    "exit": ["exit"],
    "v2": ["v2"],
    "plot": ["plot"],
    "stats": ["stat", "s"],
    "isfile": ["is", "file"],
}

# Alpha piece tokens that beta also knows (and that therefore survive the
# unified-vocabulary gate); everything not listed here and not a single
# character is gated out when used as an answer.
BETA_EXTRA_TOKENS = [
    "num", "lin", "dot", "ones", "das", "Frame", "lib", "save", "pi",
    "mask", "is", "file", "stat", "records", "from", "item", "Dict",
    "tensor", "exit", "exist", "join", "fig", "read", "csv", "sha",
]


def build(model_id: str, splits: dict, mask_surface: str,
          extra_tokens: list | None = None) -> dict:
    vocab: set = set(CHARS)
    for word, pieces in splits.items():
        assert "".join(pieces) == word, (word, pieces)
        vocab.update(pieces)
    vocab.update(extra_tokens or [])
    profile = TokenizerProfile(model_id=model_id, vocabulary=frozenset(vocab),
                               merges=(), mask_surface=mask_surface)
    for word, pieces in splits.items():
        got = profile.tokenize(word)
        assert got == pieces, f"{model_id}: {word!r} -> {got}, wanted {pieces}"
    return {
        "model_id": model_id,
        "mask_surface": mask_surface,
        "space_marker": "",
        "vocabulary": sorted(vocab),
        "merges": [],
    }


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "profiles"
    out_dir.mkdir(parents=True, exist_ok=True)
    alpha = build("alpha-bpe", ALPHA_SPLITS, "<mask>")
    beta = build("beta-bpe", BETA_SPLITS, "[MASK]", extra_tokens=BETA_EXTRA_TOKENS)
    for profile in (alpha, beta):
        target = out_dir / f"{profile['model_id']}.json"
        target.write_text(json.dumps(profile, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
        print(f"wrote {target} ({len(profile['vocabulary'])} tokens)")


if __name__ == "__main__":
    main()
