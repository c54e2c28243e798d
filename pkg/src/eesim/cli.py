"""Command-line entry point ``eesim``."""
import argparse
import json
import sys

from . import __version__, kernels
from .harness import PRESET_NAMES, SimConfig, nominal_power_table, preset, run_sweep, write_outputs
from .quantization import design_quantizer


def _apply_overrides(config, args):
    if args.trials is not None:
        config.trials = args.trials
    if args.seed is not None:
        config.master_seed = args.seed
    config.validate()
    return config


def _run(config, args):
    table = run_sweep(config, jobs=args.jobs)
    path = write_outputs(config, table, args.out, extra={"backend": kernels.BACKEND, "version": __version__})
    print(f"wrote {len(table)} rows to {path}")


def cmd_run(args):
    _run(_apply_overrides(SimConfig.from_json(args.config), args), args)


def cmd_preset(args):
    _run(_apply_overrides(preset(args.name), args), args)


def cmd_power_table(args):
    config = SimConfig.from_json(args.config)
    cols = ("arch", "n_t", "l_t", "b_dac", "loss_linear", "p_pa", "p_dacs", "p_rf_chains",
            "p_ps", "p_lo", "p_static", "flops", "p_comp")
    print(",".join(cols))
    for row in nominal_power_table(config):
        print(",".join(str(row[c]) if isinstance(row[c], (str, int)) else f"{row[c]:.6g}" for c in cols))


def cmd_quantizer(args):
    spec = design_quantizer(args.bits)
    print(json.dumps({
        "bits": spec.bits,
        "rho": spec.rho,
        "sqnr_db": spec.sqnr_db,
        "codes": spec.codes.tolist(),
        "thresholds": spec.thresholds.tolist(),
    }, indent=2))


def build_parser():
    p = argparse.ArgumentParser(prog="eesim", description="Energy/spectral efficiency of quantized digital and hybrid precoders.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def mc_options(sp):
        sp.add_argument("--trials", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", required=True)
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")

    sp = sub.add_parser("run", help="Monte Carlo sweep from a JSON config")
    sp.add_argument("--config", required=True)
    mc_options(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("preset", help="Monte Carlo sweep of a built-in figure grid")
    sp.add_argument("name", choices=PRESET_NAMES)
    mc_options(sp)
    sp.set_defaults(func=cmd_preset)

    sp = sub.add_parser("power-table", help="power breakdown per architecture")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=cmd_power_table)

    sp = sub.add_parser("quantizer", help="print a Lloyd-Max code book")
    sp.add_argument("--bits", type=int, required=True)
    sp.set_defaults(func=cmd_quantizer)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"eesim: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
