"""Command-line entry points for training, evaluation, search, and reporting."""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np
import torch

from .. import aml, recsys, theory
from ..core.train import load_checkpoint
from .config import ExperimentConfig
from .reports import REPORT_KINDS, aml_detection_csv, emit_report, rs_attack_csv
from .runs import load_ratings, resolve_target, run_aml, run_recsys, run_theory
from .search import random_search


def _load_config(ctx) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(ctx.obj["config"]) if ctx.obj["config"] else ExperimentConfig()
    if ctx.obj["seed"] is not None:
        cfg = cfg.replace(seed=ctx.obj["seed"])
    return cfg


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Flat YAML experiment config.")
@click.option("--seed", type=int, default=None, help="Overrides the config seed.")
@click.option("--out", type=click.Path(file_okay=False), default="runs",
              help="Output directory for artifacts.")
@click.pass_context
def main(ctx, config, seed, out):
    """Generate malicious activity, train detectors, analyze the toy dynamics."""
    torch.set_num_threads(1)
    ctx.ensure_object(dict)
    ctx.obj.update(config=config, seed=seed, out=Path(out))


@main.command("train-aml")
@click.pass_context
def train_aml_cmd(ctx):
    """Train the money-laundering generator/critic pair on synthetic legit data."""
    cfg = _load_config(ctx).replace(use_case="aml")
    result = run_aml(cfg, ctx.obj["out"])
    click.echo(json.dumps(result, indent=2))


@main.command("train-recsys")
@click.pass_context
def train_recsys_cmd(ctx):
    """Train the recommender injection-attack generator/discriminator pair."""
    cfg = _load_config(ctx).replace(use_case="recsys")
    result = run_recsys(cfg, ctx.obj["out"])
    click.echo(json.dumps(result, indent=2))


@main.command("theory-sim")
@click.option("--alpha", type=float, default=0.5)
@click.option("--mu-d", type=float, default=0.0)
@click.option("--sigma-d", type=float, default=1.0)
@click.option("--sigma-g", type=float, default=1.0)
@click.option("--k", "k_override", type=float, default=None,
              help="Sets sigma_d = sigma_g = sqrt(k/4) so that 2(sd^2+sg^2) = k.")
@click.option("--eta", type=float, default=0.05)
@click.option("--steps", type=int, default=5000)
@click.option("--tolerance", type=float, default=1e-3)
@click.pass_context
def theory_sim_cmd(ctx, alpha, mu_d, sigma_d, sigma_g, k_override, eta, steps, tolerance):
    """Simulate the 1D gradient flow and print its fixed point."""
    if k_override is not None:
        sigma_d = sigma_g = float(np.sqrt(k_override / 4.0))
    cfg = _load_config(ctx).replace(use_case="theory", alpha=alpha, mu_d=mu_d,
                                    sigma_d=sigma_d, sigma_g=sigma_g, eta=eta,
                                    steps=steps, tolerance=tolerance)
    result = run_theory(cfg, ctx.obj["out"])
    click.echo(f"fixed point: {result['fixed_point']:g}")
    click.echo(json.dumps(result, indent=2))


@main.command("attack-eval")
@click.option("--generator", "generator_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Trained recsys generator checkpoint.")
@click.option("--inject", "inject_sizes", type=int, multiple=True, default=(30, 60, 120))
@click.pass_context
def attack_eval_cmd(ctx, generator_path, inject_sizes):
    """Affected-user counts for the trained attack and the four baselines."""
    cfg = _load_config(ctx).replace(use_case="recsys")
    R = load_ratings(cfg)
    torch.manual_seed(cfg["seed"])
    gen = recsys.RsGenerator(n_items=R.shape[1], group_size=cfg["group_size"])
    meta = load_checkpoint(generator_path, gen)
    target = int(meta.get("target_item", resolve_target(cfg, R)))
    rc = recsys.RecommenderConfig(k=cfg["neighbor_count"], target_item=target,
                                  top_n=cfg["top_n"])
    gen.set_sample_seed(cfg["seed"])
    noise = torch.randn((1, gen.noise_dim), generator=torch.Generator().manual_seed(cfg["seed"]))
    attack = recsys.AttackProfileBatch.from_generator(gen, noise)
    rng = np.random.default_rng(cfg["seed"])
    counts: dict[str, dict[int, int]] = {"trained_generator": {}}
    for n in inject_sizes:
        counts["trained_generator"][n] = recsys.evaluate_attack(R, attack, rc, min(n, attack.group_size))
    for kind in (1, 2, 3, 4):
        baseline = recsys.baseline_attack(kind, max(inject_sizes), target, rng, R)
        counts[f"baseline_{kind}"] = {
            n: recsys.evaluate_attack(R, baseline, rc, n) for n in inject_sizes
        }
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    path = out / "rs_attack.csv"
    path.write_text(rs_attack_csv(counts, tuple(inject_sizes)))
    click.echo(path.read_text())


@main.command("detect-eval")
@click.option("--generator", "generator_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--discriminator", "discriminator_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def detect_eval_cmd(ctx, generator_path, discriminator_path):
    """Rules / model / union detection report on a mixed dataset."""
    cfg = _load_config(ctx).replace(use_case="aml")
    rng = np.random.default_rng(cfg["seed"])
    data_cfg = aml.SynthLegitConfig(
        n_accounts=cfg["n_accounts"], accounts_per_sample=cfg["n_internal"],
        n_external=cfg["n_external"], n_windows=cfg["n_windows"])
    samples, _ = aml.synth_legit_data(data_cfg, rng)
    torch.manual_seed(cfg["seed"])
    gen = aml.AmlGenerator(n_internal=cfg["n_internal"], n_external=cfg["n_external"],
                           n_windows=cfg["n_windows"])
    disc = aml.AmlDiscriminator(n_internal=cfg["n_internal"], n_external=cfg["n_external"],
                                n_windows=cfg["n_windows"])
    load_checkpoint(generator_path, gen)
    load_checkpoint(discriminator_path, disc)
    gen.set_sample_seed(cfg["seed"])

    def sample_fn(n):
        noise = torch.randn((n, gen.noise_dim),
                            generator=torch.Generator().manual_seed(cfg["seed"] + 9))
        return gen(noise)

    dataset = aml.build_mixed_dataset([("trained", sample_fn)], samples)
    report = aml.evaluate_detection(aml.RuleConfig(), disc, dataset)
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    path = out / "aml_detection.csv"
    path.write_text(aml_detection_csv(report))
    click.echo(path.read_text())


@main.command("hpsearch")
@click.option("--trials", type=int, required=True)
@click.pass_context
def hpsearch_cmd(ctx, trials):
    """Random search over the ranged hyperparameters."""
    if trials < 1:
        raise click.UsageError("--trials must be >= 1")
    cfg = _load_config(ctx)
    records = random_search(cfg, trials, ctx.obj["out"])
    ok = sum(1 for r in records if r.status == "ok")
    click.echo(f"{ok}/{len(records)} trials succeeded; registry at {ctx.obj['out']}/runs.jsonl")


@main.command("report")
@click.option("--kind", type=click.Choice(REPORT_KINDS), required=True)
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON report data (aml_detection, rs_attack) or phase CSV (theory_phase).")
@click.pass_context
def report_cmd(ctx, kind, input_path):
    """Re-emit a stored result as its canonical table."""
    if kind == "theory_phase":
        records = theory.parse_phase_portrait_csv(Path(input_path).read_text())
    else:
        with open(input_path) as fh:
            records = json.load(fh)
        if kind == "rs_attack":
            records = {k: {int(n): c for n, c in v.items()} for k, v in records.items()}
    path = emit_report(records, kind, ctx.obj["out"])
    click.echo(str(path))


if __name__ == "__main__":
    main()
