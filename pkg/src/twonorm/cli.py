"""Command-line entry point.

Exit codes: 0 when every outcome matched its expectation, 1 when some probe
outcome was unexpected, 2 for usage or configuration errors.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import cases as case_mod
from .config import RunConfig, config_digest, load_config
from .errors import ConfigError, TwoNormError
from .report import Outcome, build_document, dumps, write_trace
from .runner import run_axioms, run_classify, run_probes

EXIT_OK, EXIT_UNEXPECTED, EXIT_USAGE = 0, 1, 2


def _parse_window(ctx, param, value):
    if value is None:
        return None
    try:
        lo, hi = (int(part) for part in value.split(":"))
    except ValueError:
        raise click.BadParameter("expected N:M with integers N and M") from None
    return [lo, hi]


def _common(fn):
    options = [
        click.option("--trace", "trace_path", type=click.Path(dir_okay=False),
                     help="Write per-index measured values to this CSV file."),
        click.option("--window", callback=_parse_window, metavar="N:M", help="Override the index window."),
        click.option("--epsilon", type=float, help="Override the window tolerance."),
        click.option("--out", "out_path", type=click.Path(dir_okay=False),
                     help="Write the JSON report here instead of stdout."),
        click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), help="Override the seed."),
    ]
    for opt in options:
        fn = opt(fn)
    return fn


def _overrides(seed, epsilon, window, out_path) -> dict:
    if epsilon is not None and not epsilon > 0:
        raise ConfigError([("--epsilon", "must be positive")])
    out = {"seed": seed, "epsilon": epsilon, "window": window, "output": out_path}
    return {k: v for k, v in out.items() if v is not None}


def _summarise(outcomes: list[Outcome]) -> None:
    for o in outcomes:
        label = " ".join(x for x in (o.case, o.subject) if x)
        mark = "ok" if o.matched else "UNEXPECTED"
        want = "/".join(o.expected) if o.expected else "any"
        click.echo(f"{mark:10} {o.report.probe:28} {o.report.status:12} (expected {want}) {label}", err=True)


def _emit(outcomes: list[Outcome], seed: int, digest: str, out_path, trace_path) -> int:
    document = build_document(outcomes, seed, digest)
    text = dumps(document)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)
    if trace_path:
        write_trace(trace_path, outcomes)
    _summarise(outcomes)
    return EXIT_OK if all(o.matched for o in outcomes) else EXIT_UNEXPECTED


def _guarded(action):
    try:
        return action()
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except TwoNormError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_USAGE


def _config_command(runner, config_path, seed, epsilon, window, out_path, trace_path) -> int:
    def action():
        cfg: RunConfig = load_config(config_path, _overrides(seed, epsilon, window, out_path))
        outcomes = runner(cfg, trace_path)
        return _emit(outcomes, cfg.seed, cfg.digest, cfg.output, trace_path)
    return _guarded(action)


@click.group()
@click.version_option(package_name="artifact", prog_name="twonorm")
def main():
    """Probe 2-normed spaces: axioms, sequence windows, continuity and theorem checks."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@_common
def axioms(config_path, seed, out_path, epsilon, window, trace_path):
    """Check the four 2-norm axioms on seeded samples."""
    sys.exit(_config_command(lambda cfg, _t: run_axioms(cfg), config_path, seed, epsilon, window,
                             out_path, trace_path))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@_common
def classify(config_path, seed, out_path, epsilon, window, trace_path):
    """Classify configured sequences on the index window."""
    sys.exit(_config_command(lambda cfg, t: run_classify(cfg, trace=bool(t)), config_path, seed, epsilon,
                             window, out_path, trace_path))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@_common
def probe(config_path, seed, out_path, epsilon, window, trace_path):
    """Run continuity probes on the configured function."""
    sys.exit(_config_command(lambda cfg, t: run_probes(cfg, trace=bool(t)), config_path, seed, epsilon,
                             window, out_path, trace_path))


@main.command()
@click.argument("selector", default="*")
@click.option("--fixtures", "fixtures_dir", type=click.Path(file_okay=False),
              help=f"Case directory (default: ${case_mod.FIXTURE_ENV} or the bundled fixtures).")
@click.option("--list", "list_only", is_flag=True, help="List matching case ids and exit.")
@_common
def theorems(selector, fixtures_dir, list_only, seed, out_path, epsilon, window, trace_path):
    """Run theorem and example cases whose id matches SELECTOR (a glob)."""
    def action():
        loaded = case_mod.load_cases(fixtures_dir, _overrides(seed, epsilon, window, None))
        chosen = case_mod.select_cases(loaded, selector)
        if list_only:
            for c in chosen:
                click.echo(f"{c.id}\t{c.kind}\t{c.description}")
            return EXIT_OK
        outcomes = case_mod.run_cases(chosen)
        digest = config_digest({c.id: c.config.raw for c in chosen})
        used_seed = seed if seed is not None else 0
        return _emit(outcomes, used_seed, digest, out_path, trace_path)
    sys.exit(_guarded(action))


@main.command()
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=42, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Write the golden report here.")
@click.option("--fixtures", "fixtures_dir", type=click.Path(file_okay=False))
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False))
def reproduce(seed, out_path, fixtures_dir, trace_path):
    """Re-run the golden examples and write their report."""
    def action():
        outcomes = case_mod.run_paper_examples(seed, fixtures_dir)
        loaded = {c.id: c for c in case_mod.load_cases(fixtures_dir, {"seed": seed})}
        digest = config_digest({i: loaded[i].config.raw for i in case_mod.PAPER_EXAMPLES})
        return _emit(outcomes, seed, digest, out_path, trace_path)
    sys.exit(_guarded(action))


if __name__ == "__main__":
    main()
