"""Command-line harness: synthesize streams, replay them, verify oracles."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .aggregator import load_feedback_catalog
from .config import ThresholdConfig, load_threshold_config
from .course import CognitiveStyle, default_course_fixture_path, load_course_fixture
from .replay import render_report_text, run_replay, verify_against_oracle
from .synth import profile_from_dict, write_stream_files


def _load_thresholds(config_path):
    return load_threshold_config(config_path) if config_path else ThresholdConfig()


@click.group()
def cli():
    """Affective tutoring engine replay harness."""


@cli.command()
@click.option("--profiles", "profiles_path", required=True, type=click.Path(exists=True),
              help="JSON file with learner profiles and test scripts.")
@click.option("--fixture", "fixture_path", type=click.Path(exists=True), default=None,
              help="Course fixture (defaults to the bundled course).")
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override every profile's seed.")
def generate(profiles_path, fixture_path, out_dir, seed):
    """Generate synthetic clip streams for the profiles file."""
    course = load_course_fixture(fixture_path or default_course_fixture_path())
    spec = json.loads(Path(profiles_path).read_text(encoding="utf-8"))
    default_clips = int(spec.get("clips_per_lesson", 3))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    plan_learners = []
    total = 0
    for raw in spec["learners"]:
        if seed is not None:
            raw = {**raw, "seed": seed}
        profile = profile_from_dict(raw)
        session_ids = raw.get("sessions") or [s.session_id for s in course.sessions]
        clips_per_lesson = int(raw.get("clips_per_lesson", default_clips))
        lesson_plan = []
        for session_id in session_ids:
            group = course.get_session(session_id).groups[CognitiveStyle(profile.style)]
            lesson_plan.extend((lesson.lesson_id, clips_per_lesson) for lesson in group.lessons)
        written = write_stream_files(profile, lesson_plan, out_dir)
        total += len(written)
        plan_learners.append(
            {
                "learner_id": profile.learner_id,
                "style": profile.style.value,
                "group": raw.get("group", "all"),
                "token": raw.get("token", f"token-{profile.learner_id}"),
                "test_scripts": raw.get("test_scripts", {}),
            }
        )
    plan = {"learners": plan_learners}
    (out_dir / "plan.json").write_text(json.dumps(plan, sort_keys=True, indent=1) + "\n",
                                       encoding="utf-8")
    click.echo(f"wrote {total} clip manifests for {len(plan_learners)} learner(s) to {out_dir}")


@cli.command()
@click.option("--stream-dir", required=True, type=click.Path(exists=True))
@click.option("--fixture", "fixture_path", type=click.Path(exists=True), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Threshold config JSON.")
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--base-url", default=None, help="Replay against a running service instead of in-process.")
@click.option("--admin-token", default="admin-token", show_default=True)
def replay(stream_dir, fixture_path, config_path, catalog_path, out_dir, base_url, admin_token):
    """Replay a stream directory through the engine and write the report."""
    course = load_course_fixture(fixture_path or default_course_fixture_path())
    thresholds = _load_thresholds(config_path)
    catalog = load_feedback_catalog(catalog_path)
    driver = None
    if base_url:
        import httpx

        from .replay import HttpDriver

        client = httpx.Client(base_url=base_url)
        driver = HttpDriver(client, admin_token=admin_token, learner_tokens={})
    report = run_replay(
        stream_dir, course, thresholds=thresholds, catalog=catalog, driver=driver, out_dir=out_dir
    )
    click.echo(f"replayed {len(report['learners'])} learner(s); report written to {out_dir}")


@cli.command()
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def verify(trials, seed, config_path):
    """Cross-check the aggregator and classifier against independent oracles."""
    summary = verify_against_oracle(trials, seed, cfg=_load_thresholds(config_path))
    click.echo(json.dumps(summary, indent=2, sort_keys=True))
    click.echo("PASS" if summary["ok"] else "FAIL")


@cli.command()
@click.option("--out-dir", required=True, type=click.Path(exists=True),
              help="Directory of a previous replay run.")
def report(out_dir):
    """Re-render the text report from a replay's report.json."""
    data = json.loads((Path(out_dir) / "report.json").read_text(encoding="utf-8"))
    click.echo(render_report_text(data))


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Service config JSON (bind address, storage, thresholds, catalog).")
def serve(config_path):
    """Run the HTTP service."""
    from .service import main

    main(config_path)


if __name__ == "__main__":
    cli()
