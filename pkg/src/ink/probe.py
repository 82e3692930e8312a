"""Drive predictors over quizzes, score with P@k, and build seen/unseen splits.

The wire protocol (version 1) is line-delimited JSON either over a child
process's standard streams or via HTTP POST. Request:
``{"v":1,"quiz_id":…,"text":…,"k":…}``. Response:
``{"v":1,"quiz_id":…,"candidates":[{"t":…,"s":…},…]}``. quiz_id is the join
key; response order may differ from request order.
"""

from __future__ import annotations

import json
import logging
import math
import subprocess
from dataclasses import dataclass, field
from typing import Callable, Iterable

from ink.errors import ConfigError, DataError, ProtocolError
from ink.quizforge import MASK_TOKEN, PopQuiz

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
DEFAULT_KS = (1, 5, 10, 20, 30, 40, 50)

AGG_MICRO = "micro"
AGG_MACRO = "macro_by_fqn"


@dataclass(frozen=True)
class PredictionRequest:
    quiz_id: str
    text: str
    k: int

    def to_json(self) -> dict:
        return {"v": PROTOCOL_VERSION, "quiz_id": self.quiz_id,
                "text": self.text, "k": self.k}


@dataclass(frozen=True)
class PredictionResponse:
    quiz_id: str
    candidates: tuple[tuple[str, float], ...]  # (surface, score), descending
    failed: bool = False

    def to_json(self) -> dict:
        row = {"v": PROTOCOL_VERSION, "quiz_id": self.quiz_id,
               "candidates": [{"t": t, "s": s} for t, s in self.candidates]}
        if self.failed:
            row["failed"] = True
        return row


def parse_response(raw: dict, k: int) -> PredictionResponse:
    if raw.get("v") != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {raw.get('v')!r}")
    if "quiz_id" not in raw or "candidates" not in raw:
        raise ProtocolError(f"response missing quiz_id/candidates: {raw}")
    cands = [(c["t"], float(c["s"])) for c in raw["candidates"]]
    if len(cands) > k:
        raise ProtocolError(f"{raw['quiz_id']}: {len(cands)} candidates exceed k={k}")
    for (t1, s1), (t2, s2) in zip(cands, cands[1:]):
        if s2 > s1 or (s2 == s1 and t2 <= t1):
            raise ProtocolError(
                f"{raw['quiz_id']}: candidates not in strictly descending order "
                f"after tie-break ({t1!r}@{s1} then {t2!r}@{s2})")
    return PredictionResponse(raw["quiz_id"], tuple(cands),
                              failed=bool(raw.get("failed")))


# -- predictor endpoints ---------------------------------------------------


class MockPredictor:
    """Deterministic in-process predictors used by tests and dry runs.

    ``oracle`` always ranks the answer first; ``never`` never returns it;
    ``rank:N`` places the answer at rank N (needs the answer passed in).
    """

    def __init__(self, mode: str, answers: dict[str, str] | None = None):
        self.mode = mode
        self.answers = answers or {}

    def __call__(self, request: PredictionRequest) -> PredictionResponse:
        answer = self.answers.get(request.quiz_id, "")
        fillers = [f"filler_{i:03d}" for i in range(request.k + 1)
                   if f"filler_{i:03d}" != answer]
        if self.mode == "oracle":
            surfaces = [answer] + fillers[:request.k - 1]
        elif self.mode == "never":
            surfaces = fillers[:request.k]
        elif self.mode.startswith("rank:"):
            rank = int(self.mode.split(":", 1)[1])
            if rank > request.k:
                surfaces = fillers[:request.k]
            else:
                surfaces = fillers[:rank - 1] + [answer] + fillers[rank - 1:request.k - 1]
        else:
            raise ConfigError(f"unknown mock mode {self.mode!r}")
        cands = tuple((t, float(request.k - i)) for i, t in enumerate(surfaces))
        return PredictionResponse(request.quiz_id, cands)


def _subprocess_predictor(argv: list[str]) -> Callable[[list[PredictionRequest]],
                                                       list[dict]]:
    def run(requests: list[PredictionRequest]) -> list[dict]:
        payload = "".join(json.dumps(r.to_json()) + "\n" for r in requests)
        proc = subprocess.run(argv, input=payload, capture_output=True, text=True)
        if proc.returncode != 0:
            raise ProtocolError(f"predictor {argv!r} exited {proc.returncode}: "
                                f"{proc.stderr.strip()[:500]}")
        return [json.loads(line) for line in proc.stdout.splitlines() if line.strip()]
    return run


def _http_predictor(url: str) -> Callable[[list[PredictionRequest]], list[dict]]:
    import urllib.request

    def run(requests: list[PredictionRequest]) -> list[dict]:
        out = []
        for r in requests:
            req = urllib.request.Request(
                url, data=json.dumps(r.to_json()).encode("utf-8"),
                headers={"Content-Type": "application/json"})
            with urllib.request.urlopen(req) as resp:
                out.append(json.loads(resp.read().decode("utf-8")))
        return out
    return run


def evaluate(quizzes: list[PopQuiz], predictor: str, k: int = 50,
             retries: int = 2) -> list[PredictionResponse]:
    """One response per quiz, in quiz order; persistent failures become empty
    candidate lists flagged ``failed`` so they score 0 but stay countable."""
    for quiz in quizzes:
        if quiz.template.count(MASK_TOKEN) != 1:
            raise DataError(f"{quiz.quiz_id}: template must contain exactly one "
                            f"{MASK_TOKEN} placeholder")
    requests = [PredictionRequest(q.quiz_id, q.template, k) for q in quizzes]

    if predictor.startswith("mock:"):
        mock = MockPredictor(predictor[5:], {q.quiz_id: q.answer for q in quizzes})
        return [mock(r) for r in requests]

    if predictor.startswith("cmd:"):
        transport = _subprocess_predictor(predictor[4:].split())
    elif predictor.startswith("http:"):
        transport = _http_predictor(predictor[5:])
    else:
        raise ConfigError(f"predictor spec must be mock:|cmd:|http:, got {predictor!r}")

    expected = {r.quiz_id for r in requests}
    responses: dict[str, PredictionResponse] = {}
    pending = requests
    attempt = 0
    while pending and attempt <= retries:
        attempt += 1
        try:
            raw_lines = transport(pending)
        except (ProtocolError, OSError) as exc:
            log.warning("predictor attempt %d failed: %s", attempt, exc)
            continue
        for raw in raw_lines:
            resp = parse_response(raw, k)
            if resp.quiz_id not in expected:
                raise ProtocolError(f"response for unknown quiz_id {resp.quiz_id!r}")
            responses[resp.quiz_id] = resp
        pending = [r for r in pending if r.quiz_id not in responses]
    for r in pending:
        log.warning("no response for %s after %d attempts; scoring 0", r.quiz_id, attempt)
        responses[r.quiz_id] = PredictionResponse(r.quiz_id, (), failed=True)
    return [responses[r.quiz_id] for r in requests]


# -- scoring ---------------------------------------------------------------


def answer_rank(response: PredictionResponse, answer: str) -> float:
    """1-based rank of the exact answer surface, or inf when absent."""
    for i, (surface, _score) in enumerate(response.candidates):
        if surface == answer:
            return i + 1
    return math.inf


@dataclass
class ScoreReport:
    rows: list[dict]
    ks: tuple[int, ...]
    aggregation: str
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"rows": self.rows, "ks": list(self.ks),
                "aggregation": self.aggregation, "metadata": self.metadata}

    def check_monotone(self) -> None:
        for row in self.rows:
            values = [row["p_at"][str(k)] for k in self.ks]
            for a, b in zip(values, values[1:]):
                if b < a:
                    raise DataError(f"P@k not nondecreasing in row {row}")


def _round2(x: float) -> float:
    # banker's rounding, recorded in report metadata
    return float(f"{x:.2f}")


def _cell(hit_rows: list[tuple[str, float]], ks: Iterable[int],
          aggregation: str) -> dict[str, float]:
    """hit_rows: (fqn, rank) pairs for one table cell."""
    out = {}
    for k in ks:
        if aggregation == AGG_MICRO:
            hits = [1.0 if rank <= k else 0.0 for _fqn, rank in hit_rows]
            value = sum(hits) / len(hits) if hits else 0.0
        elif aggregation == AGG_MACRO:
            per_fqn: dict[str, list[float]] = {}
            for fqn, rank in hit_rows:
                per_fqn.setdefault(fqn, []).append(1.0 if rank <= k else 0.0)
            means = [sum(v) / len(v) for v in per_fqn.values()]
            value = sum(means) / len(means) if means else 0.0
        else:
            raise ConfigError(f"unknown aggregation {aggregation!r}")
        out[str(k)] = _round2(100.0 * value)
    return out


def score(results: list[PredictionResponse], quizzes: list[PopQuiz],
          ks: Iterable[int] = DEFAULT_KS, aggregation: str = AGG_MICRO) -> ScoreReport:
    """P@k per (family, mask_kind) cell plus per-family and overall totals."""
    ks = tuple(sorted(ks))
    by_id = {r.quiz_id: r for r in results}
    missing = [q.quiz_id for q in quizzes if q.quiz_id not in by_id]
    if missing:
        raise DataError(f"{len(missing)} quizzes lack results (first: {missing[0]})")

    ranks: list[tuple[str, str, str, float]] = []  # (family, mask_kind, fqn, rank)
    n_failed = 0
    for quiz in quizzes:
        resp = by_id[quiz.quiz_id]
        if resp.failed:
            n_failed += 1
        ranks.append((quiz.family, quiz.mask_kind, quiz.fqn,
                      answer_rank(resp, quiz.answer)))

    rows = []
    families = sorted({r[0] for r in ranks})
    for family in families:
        fam_rows = [(fqn, rank) for f, _m, fqn, rank in ranks if f == family]
        kinds = sorted({m for f, m, _fqn, _r in ranks if f == family})
        for kind in kinds + ["all"]:
            cell_rows = (fam_rows if kind == "all" else
                         [(fqn, rank) for f, m, fqn, rank in ranks
                          if f == family and m == kind])
            rows.append({
                "family": family,
                "mask_kind": kind,
                "n": len(cell_rows),
                "p_at": _cell(cell_rows, ks, aggregation),
            })
    rows.append({
        "family": "all", "mask_kind": "all", "n": len(ranks),
        "p_at": _cell([(fqn, rank) for _f, _m, fqn, rank in ranks], ks, aggregation),
    })

    report = ScoreReport(rows=rows, ks=ks, aggregation=aggregation,
                         metadata={"n_quizzes": len(quizzes),
                                   "n_failed": n_failed,
                                   "rounding": "half-even"})
    report.check_monotone()
    return report


# -- seen/unseen split -----------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    seen_fqns: frozenset[str]
    unseen_fqns: frozenset[str]
    seen_libraries: frozenset[str]


def split_seen_unseen(quizzes: list[PopQuiz], training_fqn_set: set[str],
                      ) -> tuple[SplitSpec, list[PopQuiz], list[PopQuiz], list[PopQuiz]]:
    """Partition quizzes into (seen, unseen, dropped).

    Seen: fqn in the training set. Unseen: fqn absent AND its library absent
    from the seen libraries. The remainder (new fqn inside a seen library) is
    dropped and returned for counting.
    """
    seen_libraries = {fqn.split(".", 1)[0] for fqn in training_fqn_set}
    seen, unseen, dropped = [], [], []
    for quiz in quizzes:
        if quiz.fqn in training_fqn_set:
            seen.append(quiz)
        elif quiz.library not in seen_libraries:
            unseen.append(quiz)
        else:
            dropped.append(quiz)
    spec = SplitSpec(
        seen_fqns=frozenset(q.fqn for q in seen),
        unseen_fqns=frozenset(q.fqn for q in unseen),
        seen_libraries=frozenset(seen_libraries),
    )
    return spec, seen, unseen, dropped


# -- NL-context comparison -------------------------------------------------


def run_nl_comparison(base_quizzes: list[PopQuiz], nl_variants: list[PopQuiz],
                      results: dict[str, PredictionResponse],
                      ks: Iterable[int] = DEFAULT_KS) -> dict:
    """Side-by-side P@k with and without NL context.

    Per base quiz the NL score at k is the mean hit indicator over its query
    variants; base quizzes with zero variants are excluded from the NL table.
    """
    ks = tuple(sorted(ks))
    base_by_id = {q.quiz_id: q for q in base_quizzes}
    variants_of: dict[str, list[PopQuiz]] = {}
    for variant in nl_variants:
        base_id = variant.meta.get("base_quiz_id")
        if base_id is None or base_id not in base_by_id:
            raise DataError(f"NL variant {variant.quiz_id} has no valid base link")
        variants_of.setdefault(base_id, []).append(variant)

    def rank_of(quiz: PopQuiz) -> float:
        resp = results.get(quiz.quiz_id)
        if resp is None:
            raise DataError(f"missing result for {quiz.quiz_id}")
        return answer_rank(resp, quiz.answer)

    table = {"ks": list(ks), "base": {}, "with_nl": {}, "n_base": 0, "n_with_nl": 0}
    linked = [b for b in base_quizzes if b.quiz_id in variants_of]
    table["n_base"] = len(base_quizzes)
    table["n_with_nl"] = len(linked)
    for k in ks:
        base_hits = [1.0 if rank_of(b) <= k else 0.0 for b in base_quizzes]
        table["base"][str(k)] = _round2(
            100.0 * sum(base_hits) / len(base_hits)) if base_hits else 0.0
        nl_means = []
        for b in linked:
            hits = [1.0 if rank_of(v) <= k else 0.0 for v in variants_of[b.quiz_id]]
            nl_means.append(sum(hits) / len(hits))
        table["with_nl"][str(k)] = _round2(
            100.0 * sum(nl_means) / len(nl_means)) if nl_means else 0.0
    return table


# -- journal persistence ---------------------------------------------------


def save_journal(responses: list[PredictionResponse], path) -> None:
    from ink.artifacts import write_jsonl
    write_jsonl(path, (r.to_json() for r in responses))


def load_journal(path, k: int = 10 ** 9) -> list[PredictionResponse]:
    from ink.artifacts import read_jsonl
    return [parse_response(row, k) for row in read_jsonl(path)]
