"""``ink`` command line: pipeline stages and the ``all`` runner.

Exit codes: 0 success, 1 usage/configuration error, 2 data error,
3 predictor protocol error. Logs go to stderr; artifacts only to the paths
given on the command line or in the config file.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click

from ink import TOOL_VERSION
from ink.artifacts import read_jsonl, write_jsonl, write_sidecar
from ink.errors import ConfigError, DataError, ProtocolError
from ink import corpus as corpus_mod
from ink import probe as probe_mod
from ink import pyfqn
from ink import quizforge
from ink import report as report_mod
from ink import tokvocab

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

log = logging.getLogger("ink")


def _setup_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def _require(path: str | Path, producer: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing input artifact {path}; run `ink {producer}` first")
    return path


@click.group()
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
@click.option("--jobs", type=int, default=None, envvar="INK_JOBS",
              help="Intra-stage parallelism (also via INK_JOBS).")
@click.version_option(version=TOOL_VERSION.split("/")[1], prog_name="ink")
@click.pass_context
def cli(ctx, verbose, jobs):
    """Pop-quiz benchmark toolchain for API fully qualified names."""
    _setup_logging(verbose)
    ctx.obj = {"jobs": jobs or int(os.environ.get("INK_JOBS", "1") or 1)}


# -- extract ---------------------------------------------------------------


@cli.command()
@click.option("--roots", multiple=True, required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--glob", "include_glob", default=corpus_mod.DEFAULT_GLOB, show_default=True)
@click.option("--out", required=True, type=click.Path())
def extract(roots, include_glob, out):
    """Ingest source trees into a content-addressed manifest."""
    manifest = corpus_mod.ingest_corpus(list(roots), include_glob)
    corpus_mod.save_manifest(manifest, out)
    write_sidecar(out, roots=[str(Path(r).resolve()) for r in roots],
                  glob=include_glob, n_units=len(manifest.units),
                  n_skipped=len(manifest.skipped), warnings=manifest.warnings)
    click.echo(f"wrote {len(manifest.units)} units "
               f"({len(manifest.skipped)} skipped) to {out}", err=True)


# -- resolve ---------------------------------------------------------------


def _roots_for_manifest(manifest_path: Path, roots: tuple[str, ...]) -> list[str]:
    if roots:
        return list(roots)
    sidecar = manifest_path.with_name(manifest_path.name + ".meta.json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        if meta.get("roots"):
            return meta["roots"]
    raise ConfigError("cannot locate corpus roots: pass --roots or keep the "
                      "manifest sidecar produced by `ink extract`")


@cli.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--roots", multiple=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path())
def resolve(manifest, roots, out):
    """Resolve API calls and imports to fully qualified names."""
    manifest_path = _require(manifest, "extract")
    loaded = corpus_mod.load_manifest(manifest_path,
                                      _roots_for_manifest(manifest_path, roots))
    resolved = [pyfqn.resolve_unit(u) for u in loaded.units]
    rows = pyfqn.usage_rows(resolved)
    write_jsonl(out, rows)
    warnings = sorted(w for r in resolved for w in r.warnings)
    write_sidecar(out, inputs={"manifest": manifest_path},
                  n_usages=len(rows), warnings=warnings)
    click.echo(f"wrote {len(rows)} usages to {out} ({len(warnings)} warnings)", err=True)


def _load_usages(path) -> list[pyfqn.ApiUsage]:
    usages = []
    for row in read_jsonl(path):
        alias = None
        if "alias" in row:
            alias = (row["alias"]["name"], row["alias"]["imported_fqn"])
        usages.append(pyfqn.ApiUsage(row["fqn"], row["origin"],
                                     (row["line"], row["col"]), alias=alias))
    return usages


# -- vocab -----------------------------------------------------------------


@cli.command()
@click.option("--profiles", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path())
def vocab(profiles, out):
    """Build the unified vocabulary (intersection over all profiles)."""
    loaded = tokvocab.load_profiles(profiles)
    uvocab = tokvocab.build_unified_vocab(loaded)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(json.dumps(uvocab.to_json(), sort_keys=True,
                                    separators=(",", ":")) + "\n", encoding="utf-8")
    write_sidecar(out, inputs={f.name: f for f in sorted(Path(profiles).glob("*.json"))},
                  n_tokens=len(uvocab.tokens))
    click.echo(f"unified vocabulary: {len(uvocab.tokens)} tokens "
               f"from {len(loaded)} profiles", err=True)


def _load_uvocab(path) -> tokvocab.UnifiedVocabulary:
    raw = json.loads(_require(path, "vocab").read_text(encoding="utf-8"))
    return tokvocab.UnifiedVocabulary.from_json(raw)


# -- genquiz ---------------------------------------------------------------


@cli.command()
@click.option("--usages", required=True, type=click.Path())
@click.option("--uvocab", required=True, type=click.Path())
@click.option("--profiles", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--ref-profile", default=None, help="model_id used for segmentation.")
@click.option("--no-gate", is_flag=True, hidden=True,
              help="Disable unified-vocabulary gating (diagnostics only).")
@click.option("--out", required=True, type=click.Path())
def genquiz(usages, uvocab, profiles, ref_profile, no_gate, out):
    """Generate pop quizzes for the call, import and alias families."""
    usage_list = _load_usages(_require(usages, "resolve"))
    uv = _load_uvocab(uvocab)
    profile_list = tokvocab.load_profiles(profiles)
    quiz_set = quizforge.generate_quiz_set(usage_list, profile_list, uv,
                                           gate=not no_gate,
                                           ref_profile_id=ref_profile)
    quizforge.save_quizzes(quiz_set.quizzes, out)
    counts_path = Path(out).with_suffix(".counts.json")
    counts_path.write_text(json.dumps(quiz_set.counts, sort_keys=True, indent=2) + "\n",
                           encoding="utf-8")
    write_sidecar(out, inputs={"usages": usages, "uvocab": uvocab},
                  counts=quiz_set.counts, warnings=quiz_set.warnings,
                  uvocab_ref=quiz_set.uvocab_ref)
    click.echo(f"wrote {len(quiz_set.quizzes)} quizzes to {out}", err=True)


# -- adversarial -----------------------------------------------------------


@cli.command()
@click.option("--quizzes", required=True, type=click.Path())
@click.option("--usages", required=True, type=click.Path())
@click.option("--seed", type=int, required=True)
@click.option("--variants", type=int, default=10, show_default=True)
@click.option("--out", required=True, type=click.Path())
def adversarial(quizzes, usages, seed, variants, out):
    """Derive adversarial-alias quizzes from the alias family."""
    quiz_list = quizforge.load_quizzes(_require(quizzes, "genquiz"))
    pool = quizforge.collect_alias_pool(_load_usages(_require(usages, "resolve")))
    adv, warnings = quizforge.make_adversarial(quiz_list, pool, seed, variants)
    quizforge.save_quizzes(adv, out)
    write_sidecar(out, inputs={"quizzes": quizzes, "usages": usages},
                  seed=seed, variants=variants, warnings=warnings,
                  n_quizzes=len(adv))
    click.echo(f"wrote {len(adv)} adversarial quizzes to {out}", err=True)


# -- nl --------------------------------------------------------------------


@cli.command()
@click.option("--quizzes", required=True, type=click.Path())
@click.option("--queries", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--profiles", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--ref-profile", default=None,
              help="model_id whose tokenizer enforces the length cap.")
@click.option("--max-queries", type=int, default=10, show_default=True)
@click.option("--max-tokens", type=int, default=512, show_default=True)
@click.option("--joiner", default=" ", show_default=False,
              help="Separator between the query and the statement.")
@click.option("--out", required=True, type=click.Path())
def nl(quizzes, queries, profiles, ref_profile, max_queries, max_tokens, joiner, out):
    """Attach natural-language query context to quizzes."""
    quiz_list = quizforge.load_quizzes(_require(quizzes, "genquiz"))
    table = {row["fqn"]: row["queries"] for row in read_jsonl(queries)}
    profile_list = tokvocab.load_profiles(profiles)
    if ref_profile is None:
        ref = profile_list[0]
    else:
        by_id = {p.model_id: p for p in profile_list}
        if ref_profile not in by_id:
            raise ConfigError(f"unknown reference profile {ref_profile!r}")
        ref = by_id[ref_profile]
    out_list = quizforge.attach_nl_context(quiz_list, table, ref,
                                           max_queries=max_queries,
                                           max_tokens=max_tokens, joiner=joiner)
    quizforge.save_quizzes(out_list, out)
    write_sidecar(out, inputs={"quizzes": quizzes, "queries": queries},
                  n_quizzes=len(out_list), joiner=joiner)
    click.echo(f"wrote {len(out_list)} quizzes (with NL variants) to {out}", err=True)


# -- eval ------------------------------------------------------------------


@cli.command("eval")
@click.option("--quizzes", required=True, type=click.Path())
@click.option("--predictor", required=True,
              help="mock:<mode>, cmd:<argv>, or http:<url>.")
@click.option("--k", type=int, default=50, show_default=True)
@click.option("--retries", type=int, default=2, show_default=True)
@click.option("--out", required=True, type=click.Path())
def eval_cmd(quizzes, predictor, k, retries, out):
    """Run a predictor over quizzes and journal the responses."""
    quiz_list = quizforge.load_quizzes(_require(quizzes, "genquiz"))
    responses = probe_mod.evaluate(quiz_list, predictor, k=k, retries=retries)
    probe_mod.save_journal(responses, out)
    write_sidecar(out, inputs={"quizzes": quizzes}, predictor=predictor, k=k,
                  n_failed=sum(1 for r in responses if r.failed))
    click.echo(f"journaled {len(responses)} responses to {out}", err=True)


# -- score -----------------------------------------------------------------


def _parse_ks(ks: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in ks.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --ks list {ks!r}") from exc


@cli.command("score")
@click.option("--journal", required=True, type=click.Path())
@click.option("--quizzes", required=True, type=click.Path())
@click.option("--agg", type=click.Choice([probe_mod.AGG_MICRO, "macro", probe_mod.AGG_MACRO]),
              default=probe_mod.AGG_MICRO, show_default=True)
@click.option("--ks", default="1,5,10,20,30,40,50", show_default=True)
@click.option("--out", required=True, type=click.Path())
def score_cmd(journal, quizzes, agg, ks, out):
    """Score a journal with P@k and write the report (JSON + CSV)."""
    if agg == "macro":
        agg = probe_mod.AGG_MACRO
    quiz_list = quizforge.load_quizzes(_require(quizzes, "genquiz"))
    responses = probe_mod.load_journal(_require(journal, "eval"))
    report = probe_mod.score(responses, quiz_list, ks=_parse_ks(ks), aggregation=agg)
    out = Path(out)
    json_path = out if out.suffix == ".json" else out.with_suffix(".json")
    csv_path = out if out.suffix == ".csv" else out.with_suffix(".csv")
    report_mod.write_json(report, json_path)
    report_mod.write_csv(report, csv_path)
    write_sidecar(json_path, inputs={"journal": journal, "quizzes": quizzes})
    click.echo(f"wrote report to {json_path} and {csv_path}", err=True)


# -- split -----------------------------------------------------------------


@cli.command()
@click.option("--quizzes", required=True, type=click.Path())
@click.option("--training-fqns", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-prefix", required=True, type=click.Path())
def split(quizzes, training_fqns, out_prefix):
    """Partition quizzes into seen / unseen / dropped by training FQNs."""
    quiz_list = quizforge.load_quizzes(_require(quizzes, "genquiz"))
    fqn_set = {line.strip() for line in
               Path(training_fqns).read_text(encoding="utf-8").splitlines()
               if line.strip()}
    spec, seen, unseen, dropped = probe_mod.split_seen_unseen(quiz_list, fqn_set)
    prefix = Path(out_prefix)
    for name, subset in (("seen", seen), ("unseen", unseen), ("dropped", dropped)):
        quizforge.save_quizzes(subset, prefix.with_name(prefix.name + f".{name}.jsonl"))
    summary = prefix.with_name(prefix.name + ".split.json")
    summary.write_text(json.dumps({
        "n_seen": len(seen), "n_unseen": len(unseen), "n_dropped": len(dropped),
        "seen_libraries": sorted(spec.seen_libraries),
    }, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    click.echo(f"seen={len(seen)} unseen={len(unseen)} dropped={len(dropped)}", err=True)


# -- report ----------------------------------------------------------------


@cli.command("report")
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv"]), default="csv",
              show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def report_cmd(report_path, fmt, figures, out_dir):
    """Render a score report as CSV plus P@k figures."""
    raw = json.loads(_require(report_path, "score").read_text(encoding="utf-8"))
    report = probe_mod.ScoreReport(rows=raw["rows"], ks=tuple(raw["ks"]),
                                   aggregation=raw["aggregation"],
                                   metadata=raw.get("metadata", {}))
    report.check_monotone()
    out_dir = Path(out_dir)
    csv_path = report_mod.write_csv(report, out_dir / "report.csv",
                                    predictor_id=report.metadata.get("predictor", ""))
    written = [csv_path]
    if figures:
        written += report_mod.write_figures(report, out_dir)
    click.echo("wrote " + ", ".join(str(p) for p in written), err=True)


# -- all -------------------------------------------------------------------


def _cfg(config: dict, stage: str, key: str, default=None, required=False):
    value = config.get(stage, {}).get(key, default)
    if required and value is None:
        raise ConfigError(f"config missing [{stage}] {key}")
    return value


@cli.command("all")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out-root", default=None, type=click.Path(file_okay=False),
              help="Resolve output paths against this directory instead of "
                   "the config file's directory.")
@click.pass_context
def all_cmd(ctx, config_path, out_root):
    """Run extract -> resolve -> vocab -> genquiz -> eval -> score -> report."""
    config_path = Path(config_path)
    with open(config_path, "rb") as fh:
        config = tomllib.load(fh)
    base = config_path.parent
    out_base = Path(out_root) if out_root else base

    def path_of(stage, key, required=True):
        value = _cfg(config, stage, key, required=required)
        return (out_base / value) if value is not None else None

    roots = [str(base / r) for r in _cfg(config, "extract", "roots", required=True)]
    manifest_out = path_of("extract", "out")
    ctx.invoke(extract, roots=tuple(roots),
               include_glob=_cfg(config, "extract", "glob", corpus_mod.DEFAULT_GLOB),
               out=str(manifest_out))

    usages_out = path_of("resolve", "out")
    ctx.invoke(resolve, manifest=str(manifest_out), roots=tuple(roots),
               out=str(usages_out))

    profiles_dir = base / _cfg(config, "vocab", "profiles", required=True)
    uvocab_out = path_of("vocab", "out")
    ctx.invoke(vocab, profiles=str(profiles_dir), out=str(uvocab_out))

    quizzes_out = path_of("genquiz", "out")
    ctx.invoke(genquiz, usages=str(usages_out), uvocab=str(uvocab_out),
               profiles=str(profiles_dir),
               ref_profile=_cfg(config, "genquiz", "ref_profile"),
               no_gate=False, out=str(quizzes_out))

    journal_out = path_of("eval", "out")
    ctx.invoke(eval_cmd, quizzes=str(quizzes_out),
               predictor=_cfg(config, "eval", "predictor", required=True),
               k=_cfg(config, "eval", "k", 50),
               retries=_cfg(config, "eval", "retries", 2),
               out=str(journal_out))

    score_out = path_of("score", "out")
    ctx.invoke(score_cmd, journal=str(journal_out), quizzes=str(quizzes_out),
               agg=_cfg(config, "score", "agg", probe_mod.AGG_MICRO),
               ks=_cfg(config, "score", "ks", "1,5,10,20,30,40,50"),
               out=str(score_out))

    report_dir = _cfg(config, "report", "out_dir")
    if report_dir is not None:
        json_path = Path(score_out)
        if json_path.suffix != ".json":
            json_path = json_path.with_suffix(".json")
        ctx.invoke(report_cmd, report_path=str(json_path), fmt="csv",
                   figures=_cfg(config, "report", "figures", True),
                   out_dir=str(out_base / report_dir))
    click.echo("pipeline complete", err=True)


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        sys.exit(1)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    except ProtocolError as exc:
        click.echo(f"predictor protocol error: {exc}", err=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
