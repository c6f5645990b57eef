"""Command-line front door: generate, train, sweep, report, validate-store.

Exit codes: 0 success, 1 configuration error, 2 runtime failure,
3 incomplete store.  All configuration problems are raised before any
compute or file mutation.
"""

from __future__ import annotations

import argparse
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .augment import ingest_precomputed, populate_store
from .config import ExperimentConfig, load_experiment_config
from .errors import (
    ConfigError,
    IngestError,
    ManifestError,
    ProviderError,
    ResultsError,
    SeqaugError,
    SplitError,
    StoreError,
    TrainingDiverged,
)
from .manifest import DatasetManifest, load_manifest
from .models import build_model, save_checkpoint
from .providers import make_provider
from .reporting import curve, emit_report, write_curve_svg
from .results import (
    ResultsTable,
    RunRecord,
    append_run,
    completed_keys,
    load_runs,
)
from .sampler import BalancingConfig, plan_epoch
from .seeding import mix
from .splits import SplitSpec, load_split, make_few_shot_split
from .store import SequenceStore, validate_store
from .training import (
    DataContext,
    build_test_set,
    run_btl,
    run_two_step,
    save_stage_result,
    train_stage,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_INCOMPLETE = 3

_CONFIG_ERRORS = (ConfigError, ManifestError, SplitError)

_RUN_TAG = 0x52554E


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit 1)."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _parse_list(raw: str, kind):
    return tuple(kind(tok) for tok in raw.split(",") if tok.strip())


def build_parser() -> _Parser:
    parser = _Parser(prog="seqaug", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser):
        p.add_argument("--config", required=True, help="experiment config (TOML)")
        p.add_argument("--seed", type=int, default=None, help="override run seeds with one seed")
        p.add_argument("--alpha", default=None, help="override alpha (sweep: comma list)")
        p.add_argument("--m", default=None, help="override M (sweep: comma list)")
        p.add_argument("--shots", default=None, help="shots regime {1|5|full} (sweep: comma list)")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")
        p.add_argument("--parallel", type=int, default=1, help="concurrent workers")

    gen = sub.add_parser("generate", help="populate a sequence store")
    common(gen)

    train = sub.add_parser("train", help="run training for each configured seed")
    common(train)

    sweep = sub.add_parser("sweep", help="alpha x M grid of runs, resumable")
    common(sweep)

    report = sub.add_parser("report", help="tables and curves from a run store")
    report.add_argument("--store", required=True, help="run store file (JSON lines)")
    report.add_argument("--format", default="tsv", help="table format: tsv or csv")
    report.add_argument("--group-by", default="", help="comma-separated grouping fields")
    report.add_argument("--curve", default=None, help="emit curve files over this axis: alpha or m")
    report.add_argument("--out", default=None, help="output directory (default: print table)")

    validate = sub.add_parser("validate-store", help="check a sequence store for integrity")
    validate.add_argument("store", help="store root directory")
    validate.add_argument("--no-decode", action="store_true", help="skip decoding every frame")
    return parser


# -- shared run plumbing -------------------------------------------------------


def _apply_overrides(cfg: ExperimentConfig, args, *, seed_only: bool = False) -> ExperimentConfig:
    from dataclasses import replace

    updates = {}
    if args.seed is not None:
        updates["seeds"] = (args.seed,)
    if seed_only:
        # sweep treats --alpha/--m/--shots as grid axes, not scalar overrides
        return replace(cfg, **updates) if updates else cfg
    if getattr(args, "alpha", None) is not None:
        alpha = float(args.alpha)
        updates["balancing"] = BalancingConfig(
            alpha=alpha, m=cfg.balancing.m, k=cfg.balancing.k, mode=cfg.balancing.mode
        )
    if getattr(args, "m", None) is not None:
        m = int(args.m)
        updates["m"] = m
        base = updates.get("balancing", cfg.balancing)
        updates["balancing"] = BalancingConfig(
            alpha=base.alpha, m=m, k=base.k, mode=base.mode
        )
    if getattr(args, "shots", None) is not None:
        updates["shots"] = str(args.shots)
    return replace(cfg, **updates) if updates else cfg


def _resolve_split(cfg: ExperimentConfig, manifest: DatasetManifest) -> SplitSpec:
    if cfg.split_source is None:
        raise ConfigError("split.source is required for training commands")
    split = load_split(cfg.split_source)
    if cfg.derive_split:
        if cfg.shots == "full":
            raise ConfigError("split.derive needs a finite shots count")
        split = make_few_shot_split(manifest, int(cfg.shots), cfg.split_seed, split.test_ids)
    return split


def _run_one(
    cfg: ExperimentConfig,
    manifest: DatasetManifest,
    split: SplitSpec,
    store: SequenceStore | None,
    method: str,
    alpha: float,
    m: int,
    run_seed: int,
    run_store: Path,
) -> RunRecord:
    """Train one configuration cell and append its record."""
    balancing = BalancingConfig(alpha=alpha, m=m, k=cfg.balancing.k, mode=cfg.balancing.mode)
    ctx = DataContext(manifest=manifest, image_root=cfg.image_root, store=store)
    model = build_model(
        cfg.backbone, manifest.class_count, cfg.transforms.out_size, mix(cfg.init_seed, run_seed)
    )

    tag = f"{method}_a{alpha:g}_m{m}_shots{cfg.shots}_seed{run_seed}" + (
        "_btl" if cfg.btl else ""
    ) + ("_twostep" if cfg.two_step else "")
    run_dir = cfg.output_dir / tag
    run_dir.mkdir(parents=True, exist_ok=True)

    if cfg.two_step:
        _, final, (res1, res2) = run_two_step(
            model, cfg.train, balancing, store, split, ctx, cfg.transforms,
            mix(run_seed, _RUN_TAG), stage2_cfg=cfg.stage2,
        )
        save_stage_result(res1, run_dir / "stage1.jsonl")
        save_stage_result(res2, run_dir / "stage2.jsonl")
        best, stage = res2.best_accuracy, "two-step"
    elif cfg.btl:
        _, final, (res1, res2) = run_btl(
            model, cfg.train, balancing, store, split, ctx, cfg.transforms,
            mix(run_seed, _RUN_TAG), stage2_cfg=cfg.stage2,
        )
        save_stage_result(res1, run_dir / "stage1.jsonl")
        save_stage_result(res2, run_dir / "stage2.jsonl")
        best, stage = res2.best_accuracy, "stage2"
    else:
        test_set = build_test_set(manifest, split.test_ids, cfg.image_root)
        seed = mix(run_seed, _RUN_TAG)

        def source(epoch: int):
            return plan_epoch(split.train_ids, store, balancing, mix(seed, _TAG_SINGLE, epoch))

        final, res1 = train_stage(model, source, cfg.train, cfg.transforms, test_set, ctx)
        save_stage_result(res1, run_dir / "stage1.jsonl")
        best, stage = res1.best_accuracy, "single"

    save_checkpoint(final, run_dir / "model", stage=stage, epoch=cfg.train.epochs, seed=run_seed)
    record = RunRecord(
        dataset=cfg.dataset_name or manifest.name,
        backbone=cfg.backbone,
        base_aug=cfg.transforms.level,
        image_size=cfg.transforms.out_size,
        method=method,
        alpha=alpha,
        m=m,
        shots=cfg.shots,
        seed=run_seed,
        best_accuracy=best * 100.0,
        btl=cfg.btl or cfg.two_step,
        results_path=str(run_dir.relative_to(cfg.output_dir)),
    )
    append_run(run_store, record)
    return record


_TAG_SINGLE = 13


# -- commands -------------------------------------------------------------------


def cmd_generate(args) -> int:
    cfg = _apply_overrides(load_experiment_config(args.config), args)
    manifest = load_manifest(cfg.manifest_path)
    if cfg.store_root.exists() and args.force:
        shutil.rmtree(cfg.store_root)

    if cfg.dump_path is not None:
        store, report = ingest_precomputed(
            cfg.dump_path, manifest, cfg.m, cfg.k, dest=cfg.store_root
        )
    else:
        provider = make_provider(
            cfg.provider_id, trajectory=cfg.trajectory, native_resolution=cfg.native_resolution
        )
        store, report = populate_store(
            provider, manifest, cfg.m, cfg.k, cfg.base_seed, cfg.store_root,
            image_root=cfg.image_root, workers=max(1, args.parallel),
        )
    print(report.summary())
    return EXIT_OK if report.complete else EXIT_INCOMPLETE


def cmd_train(args) -> int:
    cfg = _apply_overrides(load_experiment_config(args.config), args)
    manifest = load_manifest(cfg.manifest_path)
    split = _resolve_split(cfg, manifest)

    method = cfg.method
    alpha = 0.0 if method == "baseline" else cfg.balancing.alpha
    store = None
    if alpha > 0.0:
        store = SequenceStore.open(cfg.store_root)

    run_store = cfg.output_dir / "runs.jsonl"
    done = completed_keys(run_store)
    for run_seed in cfg.seeds:
        probe = RunRecord(
            dataset=cfg.dataset_name or manifest.name,
            backbone=cfg.backbone,
            base_aug=cfg.transforms.level,
            image_size=cfg.transforms.out_size,
            method=method,
            alpha=alpha,
            m=cfg.m,
            shots=cfg.shots,
            seed=run_seed,
            best_accuracy=0.0,
            btl=cfg.btl or cfg.two_step,
        )
        if probe.key in done and not args.force:
            raise ConfigError(
                f"run already recorded for seed {run_seed} (key {probe.key}); use --force to redo"
            )
        record = _run_one(cfg, manifest, split, store, method, alpha, cfg.m, run_seed, run_store)
        print(f"seed {run_seed}: best accuracy {record.best_accuracy:.2f}%")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_experiment_config(args.config), args, seed_only=True)
    manifest = load_manifest(cfg.manifest_path)

    alphas = _parse_list(args.alpha, float) if args.alpha else tuple(
        round(0.1 * i, 1) for i in range(1, 11)
    )
    ms = _parse_list(args.m, int) if args.m else (1, 2, 4)
    shots_list = _parse_list(args.shots, str) if args.shots else (cfg.shots,)

    store = SequenceStore.open(cfg.store_root)
    run_store = cfg.output_dir / "runs.jsonl"

    cells = []
    for shots in shots_list:
        from dataclasses import replace

        shot_cfg = replace(cfg, shots=shots)
        split = _resolve_split(shot_cfg, manifest)
        for run_seed in cfg.seeds:
            cells.append((shot_cfg, split, "baseline", 0.0, 1, run_seed))
            for alpha in alphas:
                for m in ms:
                    cells.append((shot_cfg, split, cfg.method, alpha, m, run_seed))

    done = completed_keys(run_store)
    pending = []
    for cell in cells:
        shot_cfg, split, method, alpha, m, run_seed = cell
        key = (
            shot_cfg.dataset_name or manifest.name,
            shot_cfg.backbone,
            shot_cfg.transforms.level,
            shot_cfg.transforms.out_size,
            method,
            alpha,
            m,
            shot_cfg.shots,
            run_seed,
            shot_cfg.btl or shot_cfg.two_step,
        )
        if key in done:
            continue
        pending.append(cell)
    print(f"sweep: {len(cells)} cells, {len(cells) - len(pending)} already recorded")

    failures = []

    def run_cell(cell):
        shot_cfg, split, method, alpha, m, run_seed = cell
        cell_store = store if alpha > 0 else None
        try:
            _run_one(shot_cfg, manifest, split, cell_store, method, alpha, m, run_seed, run_store)
            return None
        except SeqaugError as exc:
            return f"cell method={method} alpha={alpha} m={m} shots={shot_cfg.shots} seed={run_seed}: {exc}"

    if args.parallel > 1:
        with ThreadPoolExecutor(max_workers=args.parallel) as pool:
            for err in pool.map(run_cell, pending):
                if err:
                    failures.append(err)
    else:
        for cell in pending:
            err = run_cell(cell)
            if err:
                failures.append(err)

    for err in failures:
        print(f"warning: {err}", file=sys.stderr)
    print(f"sweep complete: {len(pending) - len(failures)} ran, {len(failures)} failed")
    return EXIT_RUNTIME if failures else EXIT_OK


def cmd_report(args) -> int:
    table = ResultsTable.from_store(args.store)
    if not table.rows:
        raise ResultsError(f"run store {args.store} has no records")
    group_by = tuple(f for f in args.group_by.split(",") if f)
    text = emit_report(table, fmt=args.format, group_by=group_by)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"report.{args.format}").write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    if args.curve:
        out = Path(args.out) if args.out else Path(".")
        shots_seen = sorted({rec.shots for rec in table.rows})
        for shots in shots_seen:
            data = curve(table, args.curve, shots=shots)
            if not data.series:
                continue
            path = out / f"curve_{args.curve}_shots{shots}.svg"
            write_curve_svg(data, path, title=f"accuracy vs {args.curve} (shots={shots})")
            print(f"wrote {path}")
    return EXIT_OK


def cmd_validate_store(args) -> int:
    store = SequenceStore.open(args.store)
    report = validate_store(store, decode=not args.no_decode)
    print(report.summary())
    return EXIT_OK if report.complete else EXIT_INCOMPLETE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "generate": cmd_generate,
            "train": cmd_train,
            "sweep": cmd_sweep,
            "report": cmd_report,
            "validate-store": cmd_validate_store,
        }[args.command]
        return handler(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StoreError, IngestError, ProviderError, TrainingDiverged, ResultsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
