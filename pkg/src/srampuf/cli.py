"""Command-line entry point: ``srampuf <command> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(unreadable dumps, corrupt helper data), 3 reconstruction failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import secrets
import sys
import tempfile
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import fuzzy_extractor as fe
from . import seeding
from .analysis import entropy, metrics, reliability, reports
from .sram_model import (
    AgingProfile,
    ConfigError,
    DumpError,
    PopulationConfig,
    apply_aging,
    export_dumps,
    ingest_dumps,
    new_population,
    read_dump,
    sample_readout,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RECONSTRUCTION = 0, 1, 2, 3
MANIFEST = "manifest.json"
REPORTS = ("alias", "weights", "distances", "entropy", "correlation", "convergence", "biterror")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- manifests

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _resolve_seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
    return args.seed


def write_manifest(out_dir: Path, args, argv: list[str], config: dict | None, outputs: list[Path], started: float):
    out_dir = Path(out_dir)
    rel = sorted({str(p.relative_to(out_dir)) if p.is_relative_to(out_dir) else str(p) for p in outputs})
    manifest = {
        "command": args.command,
        "argv": argv,
        "config": config,
        "rng_seed": getattr(args, "seed", None),
        "tool_version": __version__,
        "outputs": {p: _sha256(out_dir / p if not Path(p).is_absolute() else Path(p)) for p in rel},
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "wall_clock_seconds": round(time.time() - started, 3),
    }
    path = out_dir / MANIFEST
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _recorded_argv(argv: list[str], args) -> list[str]:
    """argv with the drawn seed made explicit, so the manifest replays exactly."""
    argv = list(argv)
    if hasattr(args, "seed") and "--seed" not in argv:
        argv += ["--seed", str(args.seed)]
    return argv


# ---------------------------------------------------------------- simulate

def _load_sim_config(args) -> dict:
    cfg = {"population": PopulationConfig().to_dict(), "aging": None, "readouts": 1}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict) or set(data) - set(cfg):
            raise ConfigError(f"config must be a JSON object with keys from {sorted(cfg)}")
        cfg.update(data)
    if args.devices is not None:
        cfg["population"]["n_devices"] = args.devices
    if args.bits is not None:
        cfg["population"]["n_bits"] = args.bits
    if args.readouts is not None:
        cfg["readouts"] = args.readouts
    if args.aged:
        cfg["aging"] = "testbed"
    if not isinstance(cfg["readouts"], int) or cfg["readouts"] < 1:
        raise ConfigError("readouts must be a positive integer")
    # normalise through the dataclasses so the manifest holds the full config
    cfg["population"] = PopulationConfig.from_dict(cfg["population"]).to_dict()
    return cfg


def cmd_simulate(args, argv) -> int:
    started = time.time()
    cfg = _load_sim_config(args)
    seed = _resolve_seed(args)
    pcfg = PopulationConfig.from_dict(cfg["population"])
    pop = new_population(pcfg, seed)
    aging = cfg["aging"]
    if aging is not None:
        profile = AgingProfile.testbed(pcfg.n_bits) if aging == "testbed" else AgingProfile.from_dict(aging)
        pop = apply_aging(pop, profile)
    out = Path(args.out)
    dumps = out / "dumps"
    if dumps.exists() and any(dumps.iterdir()):
        raise UsageError(f"{dumps} already holds dumps; choose an empty output directory")
    outputs = []
    for d in range(pop.n_devices):
        outputs += export_dumps([sample_readout(pop, d, k) for k in range(cfg["readouts"])], dumps)
    truth = out / "truth"
    outputs.append(reports.write_csv(truth / "thetas.csv", "srampuf.thetas/1", ("position", "theta"),
                                     enumerate(pop.thetas)))
    outputs.append(reports.write_csv(truth / "devices.csv", "srampuf.devices/1", ("device", "theta_skew"),
                                     enumerate(pop.device_skew)))
    write_manifest(out, args, _recorded_argv(argv, args), cfg, outputs, started)
    print(f"wrote {pop.n_devices} devices x {cfg['readouts']} readouts of {pop.n_bits} bits to {dumps}")
    return EXIT_OK


# ---------------------------------------------------------------- analyze

def _group(readouts):
    by_dev: dict = {}
    for ro in readouts:
        by_dev.setdefault(ro.device_id, []).append(ro)
    return by_dev


def cmd_analyze(args, argv) -> int:
    started = time.time()
    readouts = ingest_dumps(args.dumps)
    by_dev = _group(readouts)
    firsts = metrics.as_matrix([rs[0] for rs in by_dev.values()])
    devices = list(by_dev)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bb = args.block_bytes
    outputs = []
    for report in args.report or ["alias", "entropy"]:
        if report == "alias":
            alias = metrics.bit_alias(firsts)
            outputs.append(reports.write_csv(out / "alias.csv", "srampuf.alias/1", ("position", "alias"),
                                             reports.alias_rows(alias)))
            outputs.append(reports.write_csv(out / "alias_hist.csv", "srampuf.alias_hist/1",
                                             ("bin_low", "bin_high", "count"), reports.alias_histogram(alias)))
        elif report == "weights":
            rows = ((dev, k, w) for dev, row in zip(devices, firsts)
                    for k, w in enumerate(metrics.hamming_weight_blocks(row, bb)))
            outputs.append(reports.write_csv(out / "weights.csv", "srampuf.weights/1",
                                             ("device", "block_index", "weight"), rows))
        elif report in ("distances", "entropy"):
            rows = list(reports.entropy_report_rows("inter", metrics.inter_stats(firsts, bb)))
            for dev, rs in by_dev.items():
                if len(rs) > 1:
                    rows += reports.entropy_report_rows(f"intra:{dev}", metrics.intra_stats(rs, bb))
            outputs.append(reports.write_csv(out / f"{report}.csv", f"srampuf.{report}/1",
                                             reports.ENTROPY_HEADER, rows))
        elif report == "correlation":
            sel = firsts[: args.max_devices]
            corr = metrics.correlation_matrix(sel)
            rows = ((devices[i], devices[j], corr.matrix[i, j]) for i in range(len(sel)) for j in range(len(sel)))
            outputs.append(reports.write_csv(out / "correlation.csv", "srampuf.correlation/1",
                                             ("device_a", "device_b", "pearson"), rows))
        elif report == "convergence":
            rng = np.random.default_rng(args.seed if args.seed is not None else 0)
            p1 = float(firsts.mean())
            rows = []
            total = firsts.shape[0]
            for n in sorted({n for n in (2, 5, 10, 20, 50, 100, 200, 400, 700) if n <= total} | {total}):
                idx = rng.choice(firsts.shape[0], n, replace=False)
                emp = float(entropy.per_bit_min_entropy(firsts[idx]).mean())
                rows.append((n, emp, entropy.expected_estimator(p1, n), entropy.estimator_std_error(n)))
            outputs.append(reports.write_csv(out / "convergence.csv", "srampuf.convergence/1",
                                             ("n_devices", "empirical_hmin", "expected_hmin", "std_error"), rows))
        elif report == "biterror":
            rows = []
            for dev, rs in by_dev.items():
                if len(rs) > 1:
                    rows.append((dev, metrics.max_bit_error(rs, args.reference).maximum))
            outputs.append(reports.write_csv(out / "biterror.csv", "srampuf.biterror/1",
                                             ("device", "max_bit_error"), rows))
    write_manifest(out, args, argv, None, outputs, started)
    for p in outputs:
        print(p)
    return EXIT_OK


# ---------------------------------------------------------------- seeding

def cmd_budget(args, argv) -> int:
    budget = seeding.seed_budget(args.target, args.hmin, args.epsilon_exp)
    print(json.dumps(budget.to_dict(), indent=2))
    return EXIT_OK


def cmd_plan(args, argv) -> int:
    cfg = fe.FuzzyConfig(args.offset_bytes, args.reps)
    plan = seeding.plan_regions(args.total_bits, args.secure_bytes, args.simple_bytes, cfg, args.start_bits)
    print(json.dumps(plan.to_dict(), indent=2))
    return EXIT_OK


def cmd_seed(args, argv) -> int:
    readout = read_dump(args.dump)
    start = args.offset_bytes * 8
    if args.kind == "simple":
        length = args.length_bytes or seeding.SIMPLE_SEED_MIN_BYTES
        seg = readout.bits[start:start + length * 8]
        print(f"{seeding.simple_seed(seg):08x}")
    else:
        length = args.length_bytes or seeding.SECURE_SEED_MIN_BYTES
        seg = readout.bits[start:start + length * 8]
        print(seeding.secure_seed(seg).hex())
    return EXIT_OK


# ---------------------------------------------------------------- fuzzy extractor

def _fuzzy_config(args) -> fe.FuzzyConfig:
    return fe.FuzzyConfig(args.offset_bytes, args.reps, fe.HASH_SHA256, args.sram_offset)


def cmd_enroll(args, argv) -> int:
    started = time.time()
    cfg = _fuzzy_config(args)
    seed = _resolve_seed(args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    helper, key = fe.enroll_external(args.dump, cfg, out, fe.offset_source_from_seed(seed),
                                     text_path=args.c_header, force=args.force)
    outputs = [out] + ([Path(args.c_header)] if args.c_header else [])
    config = {"offset_len_bytes": cfg.offset_len_bytes, "repetitions": cfg.repetitions,
              "sram_offset_bits": cfg.sram_offset_bits, "sram_len_bits": cfg.sram_len_bits}
    manifest_dir = Path(args.manifest_dir) if args.manifest_dir else out.parent
    write_manifest(manifest_dir, args, _recorded_argv(argv, args), config,
                   [p.resolve() for p in outputs], started)
    print(key.hex())
    return EXIT_OK


def cmd_reconstruct(args, argv) -> int:
    helper = fe.read_helper(args.helper)
    readout = read_dump(args.dump)
    key = fe.reconstruct(helper.config.segment(readout), helper)
    print(key.hex())
    return EXIT_OK


def cmd_assess(args, argv) -> int:
    started = time.time()
    rows = reliability.assess_grid(args.bias, args.pe, args.offsets, args.reps, args.measure)
    if args.mc_trials:
        seed = _resolve_seed(args)
        rng = np.random.default_rng(seed)
        rows = [
            reliability.ExtractorAssessment(
                **{**a.to_dict(), "empirical_failure_rate": reliability.simulate_failures(
                    fe.FuzzyConfig(a.offset_len_bytes, a.repetitions), args.mc_trials, rng, p_e=args.pe).rate})
            for a in rows
        ]
    out = Path(args.out)
    reports.write_csv(out, "srampuf.assessment/1", reports.ASSESS_HEADER, reports.assessment_rows(rows))
    write_manifest(out.parent, args, _recorded_argv(argv, args) if args.mc_trials else argv,
                   {"bias": args.bias, "p_e": args.pe}, [out.resolve()], started)
    print(out)
    return EXIT_OK


def cmd_rerun(args, argv) -> int:
    """Replay a manifest into a new output location and compare artifact hashes."""
    manifest = json.loads(Path(args.manifest).read_text())
    if manifest["command"] != "simulate":
        raise UsageError("rerun supports simulate manifests")
    old = manifest["argv"]
    new, skip = [], False
    for tok in old:
        if skip:
            skip = False
            continue
        if tok in ("--out", "--config"):
            skip = True
            continue
        new.append(tok)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        cfg_path = Path(tmp) / "config.json"
        cfg_path.write_text(json.dumps(manifest["config"]))
        code = main(new + ["--config", str(cfg_path), "--out", str(out)])
    if code != EXIT_OK:
        return code
    replay = json.loads((out / MANIFEST).read_text())
    if replay["outputs"] != manifest["outputs"]:
        print("rerun artifacts differ from the manifest", file=sys.stderr)
        return EXIT_DATA
    print("rerun reproduced all artifacts")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _csv_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _int_range(text: str) -> list[int]:
    if "-" in text and "," not in text:
        lo, hi = text.split("-")
        return list(range(int(lo), int(hi) + 1))
    return _csv_ints(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="srampuf", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a device population and write dumps")
    s.add_argument("--config", help="JSON with population / aging / readouts keys")
    s.add_argument("--devices", type=int)
    s.add_argument("--bits", type=int)
    s.add_argument("--readouts", type=int, help="readouts per device")
    s.add_argument("--aged", action="store_true", help="apply the aged-testbed profile")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="statistics over a dump tree")
    a.add_argument("dumps")
    a.add_argument("--block-bytes", type=int, default=metrics.DEFAULT_BLOCK_BYTES)
    a.add_argument("--report", action="append", choices=REPORTS)
    a.add_argument("--max-devices", type=int, default=100, help="devices in the correlation matrix")
    a.add_argument("--reference", choices=("first", "majority"), default="first")
    a.add_argument("--seed", type=int, help="subsampling seed for the convergence report")
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("budget", help="SRAM length needed for a seed")
    b.add_argument("--target", type=int, required=True)
    b.add_argument("--hmin", type=float, required=True)
    b.add_argument("--epsilon-exp", type=int, default=0)
    b.set_defaults(func=cmd_budget)

    pl = sub.add_parser("plan", help="lay out key and seed regions in memory")
    pl.add_argument("--total-bits", type=int, default=64 * 1024 * 8)
    pl.add_argument("--secure-bytes", type=int, default=seeding.SECURE_SEED_MIN_BYTES)
    pl.add_argument("--simple-bytes", type=int, default=seeding.SIMPLE_SEED_MIN_BYTES)
    pl.add_argument("--offset-bytes", type=int, default=24)
    pl.add_argument("--reps", type=int, default=5)
    pl.add_argument("--start-bits", type=int)
    pl.set_defaults(func=cmd_plan)

    for name, func in (("enroll", cmd_enroll), ("reconstruct", cmd_reconstruct)):
        e = sub.add_parser(name, help=f"{name} a key from a dump file")
        e.add_argument("--dump", required=True)
        if name == "enroll":
            e.add_argument("--offset-bytes", type=int, default=24)
            e.add_argument("--reps", type=int, default=5)
            e.add_argument("--sram-offset", type=int, default=0, help="region start in bits")
            e.add_argument("--out", required=True, help="helper data file")
            e.add_argument("--c-header", help="also write a C array rendering")
            e.add_argument("--force", action="store_true", help="overwrite existing helper data")
            e.add_argument("--seed", type=int, help="seed for the offset randomness")
            e.add_argument("--manifest-dir")
        else:
            e.add_argument("--helper", required=True)
        e.set_defaults(func=func)

    sd = sub.add_parser("seed", help="derive a seed from a dump file")
    sd.add_argument("--dump", required=True)
    sd.add_argument("--kind", choices=("simple", "secure"), default="secure")
    sd.add_argument("--offset-bytes", type=int, default=0)
    sd.add_argument("--length-bytes", type=int)
    sd.set_defaults(func=cmd_seed)

    ass = sub.add_parser("assess", help="remaining entropy and failure rate over a config grid")
    ass.add_argument("--bias", type=float, default=0.596)
    ass.add_argument("--pe", type=float, default=0.03)
    ass.add_argument("--offsets", type=_int_range, default=list(range(9, 25)))
    ass.add_argument("--reps", type=_int_range, default=[1, 3, 5, 7, 9, 11, 13])
    ass.add_argument("--measure", choices=("shannon", "min"), default="shannon")
    ass.add_argument("--mc-trials", type=int, default=0)
    ass.add_argument("--seed", type=int)
    ass.add_argument("--out", required=True)
    ass.set_defaults(func=cmd_assess)

    r = sub.add_parser("rerun", help="replay a simulate manifest and verify artifact hashes")
    r.add_argument("manifest")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_rerun)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except fe.ReconstructionFailure as exc:
        print(f"reconstruction failed: {exc}", file=sys.stderr)
        return EXIT_RECONSTRUCTION
    except (DumpError, fe.HelperDataError, OSError) as exc:
        if isinstance(exc, FileExistsError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
