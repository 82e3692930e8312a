"""Pop-quiz generation: cloze statements with exactly one masked token.

Per module level the masking taxonomy is a partition: a single-token level
yields one ``full`` quiz, a multi-token level yields a ``first`` and a
``last`` quiz. A quiz is retained only when its answer token is inside the
unified vocabulary, so every benchmarked model is able to emit it.

Dedup is per unique FQN: one quiz per (fqn, family, level, mask_kind) and,
for the alias family, per alias pair. Statements are segmented with a single
reference profile; the other profiles contribute through the vocabulary gate.
"""

from __future__ import annotations

import hashlib
import logging
import random
from dataclasses import dataclass, field, replace
from typing import Iterable

from ink.pyfqn import ApiUsage, ORIGIN_ALIAS_CALL
from ink.tokvocab import (
    FAMILY_ALIAS,
    FAMILY_CALL,
    FAMILY_IMPORT,
    SegmentedStatement,
    SkipSegment,
    TokenizerProfile,
    UnifiedVocabulary,
    segment,
)

log = logging.getLogger(__name__)

MASK_TOKEN = "[MASK]"  # neutral placeholder; adapters map it to model surfaces

FAMILY_ALIAS_ADV = "alias_adv"
FAMILIES = (FAMILY_CALL, FAMILY_IMPORT, FAMILY_ALIAS)
MASK_KINDS = ("first", "last", "full")


@dataclass(frozen=True)
class PopQuiz:
    quiz_id: str
    family: str
    template: str
    answer: str
    fqn: str
    level_index: int
    mask_kind: str
    nl_context: str | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def library(self) -> str:
        return self.fqn.split(".", 1)[0]

    def to_json(self) -> dict:
        row = {
            "quiz_id": self.quiz_id,
            "family": self.family,
            "template": self.template,
            "answer": self.answer,
            "fqn": self.fqn,
            "level_index": self.level_index,
            "mask_kind": self.mask_kind,
            "meta": self.meta,
        }
        if self.nl_context is not None:
            row["nl_context"] = self.nl_context
        return row

    @classmethod
    def from_json(cls, row: dict) -> "PopQuiz":
        return cls(
            quiz_id=row["quiz_id"],
            family=row["family"],
            template=row["template"],
            answer=row["answer"],
            fqn=row["fqn"],
            level_index=row["level_index"],
            mask_kind=row["mask_kind"],
            nl_context=row.get("nl_context"),
            meta=row.get("meta", {}),
        )


@dataclass
class QuizSet:
    quizzes: list[PopQuiz]
    uvocab_ref: str = ""
    warnings: list[str] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, dict[str, int]]:
        """Per-family tallies in the first/last/full/total layout."""
        table: dict[str, dict[str, int]] = {}
        for quiz in self.quizzes:
            row = table.setdefault(quiz.family,
                                   {"first": 0, "last": 0, "full": 0, "total": 0})
            row[quiz.mask_kind] += 1
            row["total"] += 1
        return table


def quiz_id_of(family: str, template: str, answer: str) -> str:
    digest = hashlib.sha256(
        "\x1f".join((family, template, answer)).encode("utf-8")).hexdigest()
    return digest[:16]


def _mask_template(seg: SegmentedStatement, level_index: int, token_index: int,
                   profile: TokenizerProfile) -> tuple[str, str]:
    """Replace one token of one level with the placeholder.

    Returns (template, answer). The answer is the normalized token surface;
    the template carries the remaining level text verbatim.
    """
    tokens = seg.levels[level_index]
    start, _end = seg.level_char_span(level_index)
    offset = start + sum(len(profile.denormalize(t)) for t in tokens[:token_index])
    width = len(profile.denormalize(tokens[token_index]))
    raw = seg.raw_text
    template = raw[:offset] + MASK_TOKEN + raw[offset + width:]
    return template, tokens[token_index]


def make_quizzes(seg: SegmentedStatement, uvocab: UnifiedVocabulary,
                 profile: TokenizerProfile, gate: bool = True) -> list[PopQuiz]:
    """All retained quizzes for one segmented statement.

    ``gate=False`` skips unified-vocabulary gating (used by the count
    symmetry check, never by the pipeline).
    """
    out: list[PopQuiz] = []
    for level_index, tokens in enumerate(seg.levels):
        if not seg.maskable[level_index]:
            continue
        if len(tokens) == 1:
            slots = [("full", 0)]
        else:
            slots = [("first", 0), ("last", len(tokens) - 1)]
        for mask_kind, token_index in slots:
            template, answer = _mask_template(seg, level_index, token_index, profile)
            if gate and answer not in uvocab.tokens:
                continue
            meta: dict = {"library": seg.fqn.split(".", 1)[0],
                          "profile": profile.model_id}
            if seg.alias is not None:
                meta["alias"] = {"name": seg.alias[0], "imported_fqn": seg.alias[1]}
            out.append(PopQuiz(
                quiz_id=quiz_id_of(seg.family, template, answer),
                family=seg.family,
                template=template,
                answer=answer,
                fqn=seg.fqn,
                level_index=level_index,
                mask_kind=mask_kind,
                meta=meta,
            ))
    return out


def generate_quiz_set(usages: Iterable[ApiUsage], profiles: list[TokenizerProfile],
                      uvocab: UnifiedVocabulary, gate: bool = True,
                      ref_profile_id: str | None = None) -> QuizSet:
    """Corpus-level quiz generation with per-FQN dedup.

    Call and import families enumerate over unique FQNs; the alias family
    enumerates over unique (fqn, alias) pairs with a call chain after the
    alias. Segmentation uses the reference profile (lexicographically first
    model_id unless overridden).
    """
    profiles = sorted(profiles, key=lambda p: p.model_id)
    if ref_profile_id is None:
        ref = profiles[0]
    else:
        by_id = {p.model_id: p for p in profiles}
        if ref_profile_id not in by_id:
            from ink.errors import ConfigError
            raise ConfigError(f"unknown reference profile {ref_profile_id!r}")
        ref = by_id[ref_profile_id]

    fqns: set[str] = set()
    alias_pairs: set[tuple[str, str, str]] = set()  # (fqn, alias_name, imported)
    for usage in usages:
        fqns.add(usage.fqn)
        if usage.origin == ORIGIN_ALIAS_CALL and usage.alias is not None:
            name, imported = usage.alias
            if usage.fqn.startswith(imported + "."):
                alias_pairs.add((usage.fqn, name, imported))

    warnings: list[str] = []
    quizzes: list[PopQuiz] = []
    seen_keys: set = set()
    seen_ids: set[str] = set()

    def emit(seg: SegmentedStatement, alias_key=None) -> None:
        for quiz in make_quizzes(seg, uvocab, ref, gate=gate):
            key = (quiz.fqn, quiz.family, quiz.level_index, quiz.mask_kind, alias_key)
            if key in seen_keys or quiz.quiz_id in seen_ids:
                continue
            seen_keys.add(key)
            seen_ids.add(quiz.quiz_id)
            quizzes.append(quiz)

    for fqn in sorted(fqns):
        usage = ApiUsage(fqn=fqn, origin="call", span=(0, 0))
        for family in (FAMILY_CALL, FAMILY_IMPORT):
            try:
                emit(segment(usage, family, ref))
            except SkipSegment as exc:
                warnings.append(f"{fqn}: {family}: {exc}")

    for fqn, name, imported in sorted(alias_pairs):
        usage = ApiUsage(fqn=fqn, origin=ORIGIN_ALIAS_CALL, span=(0, 0),
                         alias=(name, imported))
        try:
            emit(segment(usage, FAMILY_ALIAS, ref), alias_key=(name, imported))
        except SkipSegment as exc:
            warnings.append(f"{fqn} as {name}: alias: {exc}")

    return QuizSet(quizzes=quizzes,
                   uvocab_ref=",".join(uvocab.source_profiles),
                   warnings=warnings)


# -- adversarial aliases ---------------------------------------------------


def collect_alias_pool(usages: Iterable[ApiUsage]) -> dict[str, set[str]]:
    """Map imported module -> set of alias names bound to it in the corpus."""
    pool: dict[str, set[str]] = {}
    for usage in usages:
        if usage.alias is not None:
            name, imported = usage.alias
            pool.setdefault(imported, set()).add(name)
    return pool


def _swap_alias(template: str, old: str, new: str) -> str:
    """Replace the alias in both the import line and the call head."""
    return template.replace(f" as {old}\n{old}.", f" as {new}\n{new}.")


def make_adversarial(quizzes: list[PopQuiz], alias_pool: dict[str, set[str]],
                     rng_seed: int, n_variants: int = 10) -> tuple[list[PopQuiz], list[str]]:
    """Replace each alias quiz's alias with aliases drawn from other modules.

    Candidates exclude every alias bound to the quiz's own module (so the
    replacement can never equal the original) and sampling is derived from
    (rng_seed, quiz_id) so the output is independent of iteration order.
    """
    out: list[PopQuiz] = []
    warnings: list[str] = []
    for quiz in quizzes:
        if quiz.family != FAMILY_ALIAS:
            continue
        alias = quiz.meta.get("alias")
        if not alias:
            continue
        own_module = alias["imported_fqn"]
        own_aliases = alias_pool.get(own_module, set()) | {alias["name"]}
        candidates = sorted({a for module, names in alias_pool.items()
                             if module != own_module for a in names} - own_aliases)
        if len(candidates) < n_variants:
            warnings.append(f"{quiz.quiz_id}: alias pool has only "
                            f"{len(candidates)} candidates (< {n_variants})")
        seed_material = f"{rng_seed}:{quiz.quiz_id}".encode("utf-8")
        rng = random.Random(int.from_bytes(hashlib.sha256(seed_material).digest()[:8], "big"))
        picked = rng.sample(candidates, min(n_variants, len(candidates)))
        for new_alias in picked:
            template = _swap_alias(quiz.template, alias["name"], new_alias)
            meta = dict(quiz.meta)
            meta["adversarial_alias"] = new_alias
            meta["base_quiz_id"] = quiz.quiz_id
            out.append(replace(
                quiz,
                quiz_id=quiz_id_of(FAMILY_ALIAS_ADV, template, quiz.answer),
                family=FAMILY_ALIAS_ADV,
                template=template,
                meta=meta,
            ))
    return out, warnings


# -- natural-language context ----------------------------------------------


def attach_nl_context(quizzes: list[PopQuiz], query_table: dict[str, list[str]],
                      ref_profile: TokenizerProfile, max_queries: int = 10,
                      max_tokens: int = 512, joiner: str = " ") -> list[PopQuiz]:
    """Prepend natural-language queries to quizzes whose FQN has queries.

    Keeps the ``max_queries`` shortest queries (character length, ties broken
    lexicographically); variants longer than ``max_tokens`` under the
    reference profile are dropped. Quizzes without queries pass through
    unmodified.
    """
    out: list[PopQuiz] = []
    for quiz in quizzes:
        queries = query_table.get(quiz.fqn)
        if not queries:
            out.append(quiz)
            continue
        chosen = sorted(queries, key=lambda q: (len(q), q))[:max_queries]
        for query in chosen:
            text = query + joiner + quiz.template
            if ref_profile.count_tokens(text) > max_tokens:
                continue
            meta = dict(quiz.meta)
            meta["base_quiz_id"] = quiz.quiz_id
            out.append(replace(
                quiz,
                quiz_id=quiz_id_of(quiz.family, text, quiz.answer),
                template=text,
                nl_context=query,
                meta=meta,
            ))
    return out


# -- persistence -----------------------------------------------------------


def save_quizzes(quizzes: list[PopQuiz], path) -> None:
    from ink.artifacts import write_jsonl
    write_jsonl(path, (q.to_json() for q in quizzes))


def load_quizzes(path) -> list[PopQuiz]:
    from ink.artifacts import read_jsonl
    return [PopQuiz.from_json(row) for row in read_jsonl(path)]


def counts_table(quizzes: list[PopQuiz]) -> dict:
    """Companion counts JSON mirroring the family x first/last/full layout."""
    return QuizSet(quizzes=list(quizzes)).counts
