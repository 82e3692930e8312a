"""Tokenizer profiles, the unified vocabulary, and statement segmentation.

A profile is data, not code: a vocabulary plus ordered byte-pair merge rules
loaded from JSON. Token surfaces are normalized before any set operation so
scheme-specific whitespace sigils compare equal; the canonical space-prefix
flag is CANON_SPACE.

Statements are split at structural delimiters first and each module level is
tokenized independently, so a dot (or ``from``/``import``/``as``) can never be
merged into a level token.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from ink.errors import ConfigError, DataError
from ink.pyfqn import ApiUsage

CANON_SPACE = "▁"  # canonical space-prefix marker for normalized surfaces

FAMILY_CALL = "call"
FAMILY_IMPORT = "import"
FAMILY_ALIAS = "alias"

MASK_FULL = "full"
MASK_PARTIAL = "partial"


@dataclass(frozen=True)
class TokenizerProfile:
    model_id: str
    vocabulary: frozenset[str]  # normalized surfaces
    merges: tuple[tuple[str, str], ...]
    mask_surface: str = "[MASK]"
    space_marker: str = ""  # scheme-specific sigil in the raw vocab file, if any

    def normalize(self, surface: str) -> str:
        if self.space_marker and surface.startswith(self.space_marker):
            return CANON_SPACE + surface[len(self.space_marker):]
        return surface

    def denormalize(self, surface: str) -> str:
        """Surface as plain text: the space flag becomes a real space."""
        if surface.startswith(CANON_SPACE):
            return " " + surface[len(CANON_SPACE):]
        return surface

    @lru_cache(maxsize=None)
    def _merge_rank(self) -> dict[tuple[str, str], int]:
        return {pair: i for i, pair in enumerate(self.merges)}

    def tokenize(self, fragment: str) -> list[str]:
        """Tokenize one delimiter-free fragment.

        With merge rules, behaves as a byte-pair tokenizer: starts from
        characters and applies the highest-priority merge present until none
        applies. Without merges, greedy longest-prefix matching over the
        vocabulary. Every emitted token must be in the vocabulary; a fragment
        containing an out-of-vocabulary character is a data error for this
        profile.
        """
        if not fragment:
            return []
        for ch in fragment:
            if ch not in self.vocabulary:
                raise DataError(f"profile {self.model_id}: character {ch!r} "
                                f"not in vocabulary (fragment {fragment!r})")
        if not self.merges:
            return self._tokenize_longest(fragment)
        ranks = self._merge_rank()
        parts = list(fragment)
        while len(parts) > 1:
            best = None
            best_rank = None
            for i in range(len(parts) - 1):
                rank = ranks.get((parts[i], parts[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best, best_rank = i, rank
            if best is None:
                break
            merged = parts[best] + parts[best + 1]
            parts = parts[:best] + [merged] + parts[best + 2:]
        for tok in parts:
            if tok not in self.vocabulary:
                raise DataError(f"profile {self.model_id}: merge produced "
                                f"out-of-vocabulary token {tok!r}")
        return parts

    def _tokenize_longest(self, fragment: str) -> list[str]:
        parts: list[str] = []
        pos = 0
        while pos < len(fragment):
            for end in range(len(fragment), pos, -1):
                if fragment[pos:end] in self.vocabulary:
                    parts.append(fragment[pos:end])
                    pos = end
                    break
            else:
                raise DataError(f"profile {self.model_id}: no vocabulary token "
                                f"matches at {fragment[pos:]!r}")
        return parts

    def count_tokens(self, text: str) -> int:
        """Token count for length caps; unknown characters count as one token."""
        total = 0
        for word in text.replace("\n", " ").split(" "):
            if not word:
                continue
            try:
                total += len(self.tokenize(word))
            except DataError:
                total += sum(1 for ch in word if ch not in self.vocabulary)
                known = "".join(ch for ch in word if ch in self.vocabulary)
                if known:
                    total += len(self.tokenize(known))
        return total


def load_profile(path: str | Path) -> TokenizerProfile:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read tokenizer profile {path}: {exc}") from exc
    for key in ("model_id", "vocabulary"):
        if key not in raw:
            raise DataError(f"profile {path} missing required key {key!r}")
    marker = raw.get("space_marker", "") or ""
    vocab = frozenset(
        CANON_SPACE + t[len(marker):] if marker and t.startswith(marker) else t
        for t in raw["vocabulary"])
    merges = tuple((a, b) for a, b in raw.get("merges", []))
    return TokenizerProfile(
        model_id=raw["model_id"],
        vocabulary=vocab,
        merges=merges,
        mask_surface=raw.get("mask_surface", "[MASK]"),
        space_marker=marker,
    )


def load_profiles(profile_dir: str | Path) -> list[TokenizerProfile]:
    """Load every ``*.json`` profile in a directory, sorted by model_id."""
    paths = sorted(Path(profile_dir).glob("*.json"))
    profiles = [load_profile(p) for p in paths]
    if not profiles:
        raise ConfigError(f"no tokenizer profiles found in {profile_dir}")
    profiles.sort(key=lambda p: p.model_id)
    return profiles


@dataclass(frozen=True)
class UnifiedVocabulary:
    tokens: frozenset[str]
    source_profiles: tuple[str, ...]

    def to_json(self) -> dict:
        return {"tokens": sorted(self.tokens),
                "source_profiles": list(self.source_profiles)}

    @classmethod
    def from_json(cls, raw: dict) -> "UnifiedVocabulary":
        return cls(frozenset(raw["tokens"]), tuple(raw["source_profiles"]))


def build_unified_vocab(profiles: list[TokenizerProfile]) -> UnifiedVocabulary:
    """Exact set intersection of the normalized vocabularies."""
    if not profiles:
        raise ConfigError("at least one tokenizer profile is required")
    tokens = frozenset.intersection(*(p.vocabulary for p in profiles))
    return UnifiedVocabulary(tokens=tokens,
                             source_profiles=tuple(sorted(p.model_id for p in profiles)))


@dataclass(frozen=True)
class SegmentedStatement:
    """A statement split into module levels, each level split into tokens.

    delimiters has one more entry than levels: delimiters[0] is the (possibly
    empty) prefix, delimiters[i] sits between levels i-1 and i, and the final
    entry is the suffix. Rendering is the strict interleave of the two lists.
    maskable[i] tells quiz generation whether level i may carry the mask; for
    the alias family only the call chain after the alias name is maskable.
    """
    family: str
    levels: tuple[tuple[str, ...], ...]
    delimiters: tuple[str, ...]
    maskable: tuple[bool, ...]
    fqn: str
    alias: tuple[str, str] | None = None

    @property
    def raw_text(self) -> str:
        out = [self.delimiters[0]]
        for i, level in enumerate(self.levels):
            out.append("".join(level))
            out.append(self.delimiters[i + 1])
        return "".join(out)

    def level_char_span(self, index: int) -> tuple[int, int]:
        """Character span of level ``index`` inside raw_text."""
        pos = len(self.delimiters[0])
        for i, level in enumerate(self.levels):
            width = len("".join(level))
            if i == index:
                return pos, pos + width
            pos += width + len(self.delimiters[i + 1])
        raise IndexError(index)


class SkipSegment(Exception):
    """Raised when a usage cannot form the requested statement family."""


def _tokenize_levels(profile: TokenizerProfile, names: list[str]) -> list[tuple[str, ...]]:
    return [tuple(profile.tokenize(name)) for name in names]


def segment(usage: ApiUsage, family: str, profile: TokenizerProfile) -> SegmentedStatement:
    """Render one usage as a call / from-import / alias statement and tokenize
    each module level independently."""
    names = usage.fqn.split(".")
    if any(not n for n in names):
        raise SkipSegment(f"malformed fqn {usage.fqn!r}")

    if family == FAMILY_CALL:
        levels = _tokenize_levels(profile, names)
        delimiters = ("",) + ("." ,) * (len(names) - 1) + ("(",)
        return SegmentedStatement(family, tuple(levels), delimiters,
                                  (True,) * len(names), usage.fqn)

    if family == FAMILY_IMPORT:
        if len(names) < 2:
            raise SkipSegment(f"{usage.fqn!r} has a single level; cannot form a from-import")
        levels = _tokenize_levels(profile, names)
        delimiters = (("from ",) + (".",) * (len(names) - 2)
                      + (" import ", ""))
        return SegmentedStatement(family, tuple(levels), delimiters,
                                  (True,) * len(names), usage.fqn)

    if family == FAMILY_ALIAS:
        if usage.alias is None:
            raise SkipSegment("alias family requires an alias_call usage")
        alias_name, imported = usage.alias
        if not usage.fqn.startswith(imported + "."):
            raise SkipSegment(f"{usage.fqn!r} has no call chain after alias {alias_name!r}")
        call_names = usage.fqn[len(imported) + 1:].split(".")
        import_names = imported.split(".")
        # import line levels + alias + call chain headed by the alias
        names_all = import_names + [alias_name, alias_name] + call_names
        levels = _tokenize_levels(profile, names_all)
        delimiters = (("import ",)
                      + (".",) * (len(import_names) - 1)
                      + (" as ", "\n")
                      + (".",) * len(call_names)
                      + ("(",))
        maskable = ((False,) * (len(import_names) + 2)
                    + (True,) * len(call_names))
        return SegmentedStatement(FAMILY_ALIAS, tuple(levels), delimiters, maskable,
                                  usage.fqn, alias=usage.alias)

    raise ConfigError(f"unknown statement family {family!r}")


def classify_masking(level_tokens: tuple[str, ...] | list[str]) -> str:
    """Full masking iff the tokenizer rendered the level as a single token."""
    if not level_tokens:
        raise DataError("level has no tokens")
    return MASK_FULL if len(level_tokens) == 1 else MASK_PARTIAL
