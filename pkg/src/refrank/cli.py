"""Command-line interface.

Every subcommand runs one pipeline stage (or the whole pipeline) from a
TOML config; CLI flags override config values for the run.
"""

from __future__ import annotations

import logging
import sys
from datetime import date

import click

from refrank.config import ConfigError, load_config
from refrank.pipeline import StageError, run_pipeline


def _parse_day(_ctx, _param, value):
    if value is None:
        return None
    try:
        return date.fromisoformat(value)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc


@click.group()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Path to the pipeline TOML config.")
@click.option("--language", "language", default=None,
              help="Restrict the run to one language edition.")
@click.option("--from", "window_from", callback=_parse_day, default=None,
              metavar="YYYY-MM-DD", help="Override the window start.")
@click.option("--to", "window_to", callback=_parse_day, default=None,
              metavar="YYYY-MM-DD", help="Override the window end.")
@click.option("--model", "model", default=None,
              type=click.Choice(["F", "PR", "PR2"]),
              help="Score/report only one model.")
@click.option("--top-k", "top_k", default=None, type=int,
              help="Rank-timeline cutoff.")
@click.option("--offline", is_flag=True, default=False,
              help="Serve every remote request from cache; fail on misses.")
@click.option("-v", "--verbose", is_flag=True, default=False)
@click.pass_context
def main(ctx, config_path, language, window_from, window_to, model, top_k,
         offline, verbose):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {}
    if language:
        overrides["languages"] = [language]
    if window_from:
        overrides["window_start"] = window_from
    if window_to:
        overrides["window_end"] = window_to
    if model:
        overrides["models"] = [model]
    if top_k is not None:
        overrides["top_k"] = top_k
    if offline:
        overrides["offline"] = True
    try:
        ctx.obj = load_config(config_path, **overrides)
    except ConfigError as exc:
        raise click.ClickException(f"invalid config: {exc}") from exc


def _run(config, stages, force):
    try:
        manifest = run_pipeline(config, stages=stages, force=force)
    except StageError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for stage, info in manifest["stages"].items():
        click.echo(f"{stage}: {info['status']}")


def _stage_command(name: str, stages: list[str], help_text: str):
    @click.command(name, help=help_text)
    @click.option("--force", is_flag=True, default=False,
                  help="Recompute even if the stage artifact exists.")
    @click.pass_obj
    def cmd(config, force):
        _run(config, stages, force)

    return cmd


main.add_command(_stage_command(
    "identify", ["identify"], "Identify the topic article corpus."))
main.add_command(_stage_command(
    "fetch", ["fetch"], "Fetch revision histories and redirects."))
main.add_command(_stage_command(
    "extract", ["extract", "resolve"],
    "Extract cited sources and resolve them to domains."))
main.add_command(_stage_command(
    "views", ["views"], "Ingest daily pageview counts."))
main.add_command(_stage_command(
    "score", ["snapshot", "score"],
    "Build daily snapshots and compute model scores."))
main.add_command(_stage_command(
    "report", ["report"], "Emit rank-timeline and heatmap reports."))
main.add_command(_stage_command(
    "run", None, "Run the full pipeline end to end."))


if __name__ == "__main__":
    main()
