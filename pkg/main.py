"""
edgecodec: command-line entry point.

Generates datasets, designs codebook sets, encodes and decodes items, and
reproduces the experiments as CSV files.
"""
import argparse
import sys
import traceback
from pathlib import Path

# Ensure project root is on sys.path
PROJECT_ROOT = Path(__file__).resolve().parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from config.settings import settings
from modules.codec.bitstream import decode, decode_self_decodable, encode, encode_self_decodable
from modules.core.information import expected_cost
from modules.core.types import CodebookSet
from modules.designers.continuous import (
    PreferenceSpec, design_continuous_saa, design_sampling, evaluate_expected_bits, evaluation_sample,
    sample_preference,
)
from modules.designers.discrete import design_dca, design_kmeanspp
from modules.designers.geometry import design_exact_n3
from modules.designers.options import DesignOptions
from modules.designers.single import GridSearchSpec, exhaustive_search, optimal_single, single_objective
from modules.designers.twouser import (
    TwoUserBudget, design_twouser_dca, design_twouser_kmeanspp, joint_pref_alpha,
)
from modules.error_handler.errors import ConfigError, exit_code_for
from modules.experiments.grid_runner import GridRunner
from modules.experiments.scenarios import ScenarioConfig, gen_data, run_demo
from modules.run_logger.logger import RunLogger, configure_logging
from modules.storage.operations import DesignStore
from modules.utils.rng import STREAM_SAMPLE, stream_rng


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    """Comma list, or an inclusive range written lo-hi."""
    values = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            values.extend(range(int(lo), int(hi) + 1))
        elif part:
            values.append(int(part))
    return values


def _options(args, twouser: bool = False) -> DesignOptions:
    overrides = dict(restarts=args.restarts, seed=args.seed, max_iters=args.max_iters, epsilon=args.epsilon)
    return DesignOptions.for_twouser(**overrides) if twouser else DesignOptions.from_settings(**overrides)


# ═══════════════════════════════════════════════════════════════
#  VERBS
# ═══════════════════════════════════════════════════════════════

def cmd_gen_data(args, logger: RunLogger):
    pref = gen_data(args.n, args.j, args.seed)
    path = DesignStore().save_preference(pref, args.out)
    logger.log_info("Dataset Written", f"N={pref.n} J={pref.j} seed={args.seed}\n{path}")


def cmd_design_discrete(args, logger: RunLogger):
    store = DesignStore()
    pref = store.load_preference(args.pref)
    L = args.L or settings.symbols_per_item
    opts = _options(args)

    if args.method in ("kmeanspp", "dca"):
        designer = design_kmeanspp if args.method == "kmeanspp" else design_dca
        result = designer(pref, args.k, opts, logger=logger)
        bits, _ = expected_cost(pref, result.codebooks, L)
        path = store.save_design(result, args.out, seed=opts.seed, restarts=opts.restarts,
                                 expected_bits=bits, L=L)
    else:
        if args.method == "single":
            codebooks = CodebookSet(optimal_single(pref).q)
            objective = single_objective(pref, codebooks.matrix[0])
        else:
            codebooks, objective = exhaustive_search(pref, GridSearchSpec(args.grid_step, args.k), logger=logger)
        bits, _ = expected_cost(pref, codebooks, L)
        path = store.save_codebooks(codebooks, args.out)
        logger.log_design_result({
            "method": args.method, "k": codebooks.k, "n": codebooks.n, "objective": objective,
            "expected_bits": bits, "codebooks": codebooks.matrix.tolist(),
        })
    logger.log_info("Design Written", str(path))


def _preference_spec(args, store: DesignStore) -> PreferenceSpec:
    if args.spec:
        return store.load_preference_spec(args.spec)
    if args.kind == "uniform":
        return PreferenceSpec.uniform(args.n)
    if args.kind == "radial":
        return PreferenceSpec.radial(args.n, _floats(args.center) if args.center else None)
    if not args.alpha:
        raise ConfigError("--alpha is required for a dirichlet preference")
    return PreferenceSpec.dirichlet(_floats(args.alpha))


def cmd_design_continuous(args, logger: RunLogger):
    store = DesignStore()
    spec = _preference_spec(args, store)
    L = args.L or settings.symbols_per_item
    S = args.sample_size or settings.sample_size
    opts = _options(args)
    sample = sample_preference(spec, S, stream_rng(opts.seed, STREAM_SAMPLE), logger=logger)
    if args.samples_out:
        store.export_samples(sample, args.samples_out)

    if args.method == "saa":
        codebooks = design_continuous_saa(spec, args.k, opts=opts, sample=sample, logger=logger).codebooks
    elif args.method == "exact_n3":
        if spec.kind != "uniform" or spec.n != 3 or args.k != 2:
            raise ConfigError("exact_n3 needs a uniform preference with N=3 and K=2")
        start = design_continuous_saa(spec, 2, opts=opts, sample=sample, logger=logger).codebooks
        codebooks = design_exact_n3(start.matrix[0], start.matrix[1], opts).codebooks
    else:
        codebooks = design_sampling(spec, args.k, method=args.method.split("_", 1)[1], opts=opts,
                                    sample=sample, logger=logger).codebooks

    held_out = evaluation_sample(spec, args.eval_size or settings.eval_sample_size, opts.seed, logger=logger)
    bits = evaluate_expected_bits(codebooks, held_out, L)
    path = store.save_codebooks(codebooks, args.out)
    logger.log_design_result({
        "method": args.method, "k": codebooks.k, "n": codebooks.n, "objective": bits / L,
        "expected_bits": bits, "codebooks": codebooks.matrix.tolist(),
    })
    logger.log_info("Design Written", str(path))


def cmd_design_twouser(args, logger: RunLogger):
    store = DesignStore()
    pref = store.load_preference(args.pref)
    if args.joint:
        joint = store.load_joint(args.joint)
    elif args.alpha is not None:
        joint = joint_pref_alpha(pref.j, args.alpha)
    else:
        raise ConfigError("give --joint or --alpha")
    designer = design_twouser_kmeanspp if args.method == "kmeanspp2u" else design_twouser_dca
    result = designer(pref.spvs, joint, TwoUserBudget(*args.budget), _options(args, twouser=True),
                      L=args.L, logger=logger)
    path = store.save_twouser(result, args.out)
    logger.log_info("Design Written", f"K0={result.k0} bits={result.bits!r}\n{path}")


def cmd_encode(args, logger: RunLogger):
    store = DesignStore()
    item = store.read_item(args.item, raw=args.raw)
    if args.self_decodable:
        data = encode_self_decodable(item)
    else:
        stream = encode(item, store.load_codebooks(args.codebooks))
        logger.log_info("Encoded", f"codebook {stream.codebook_id}, "
                                   f"{stream.payload_bits} payload bits, {stream.total_bits} total")
        data = bytes(stream)
    store.write_bytes(data, args.out)


def cmd_decode(args, logger: RunLogger):
    store = DesignStore()
    data = store.read_bytes(args.stream)
    if args.self_decodable:
        item = decode_self_decodable(data)
    else:
        item = decode(data, store.load_codebooks(args.codebooks))
    store.write_item(item, args.out, raw=args.raw)
    logger.log_info("Decoded", f"{item.L} symbols -> {args.out}")


def cmd_experiment(args, logger: RunLogger):
    if args.scenario == "demo":
        report = run_demo(L=args.L, seed=args.seed, logger=logger)
        text = logger.formatter.format_demo_report(report)
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")
        print(text)
        return

    cfg = ScenarioConfig.defaults(
        args.scenario,
        n_values=_ints(args.n_values) if args.n_values else None,
        k_values=_ints(args.k_values) if args.k_values else None,
        alphas=_floats(args.alphas) if args.alphas else None,
        preferences=args.preferences.split(",") if args.preferences else None,
        methods=args.methods.split(",") if args.methods else None,
        budget=tuple(args.budget) if args.budget else None,
        items=args.items, L=args.L, sample_size=args.sample_size, eval_sample_size=args.eval_size,
        grid_step=args.grid_step, seed=args.seed, restarts=args.restarts,
        twouser_restarts=args.twouser_restarts, jobs=args.jobs, timing=args.timing,
        out=Path(args.out),
    )
    GridRunner(cfg, logger.child(f"experiment.{cfg.scenario}")).run()


# ═══════════════════════════════════════════════════════════════
#  PARSER
# ═══════════════════════════════════════════════════════════════

def _design_flags(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--L", type=int, default=None, help="symbols per item")
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgecodec", description="Codebook design for edge source coding")
    parser.add_argument("--log-level", default=None)
    parser.add_argument("--log-file", default=None)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen-data", help="random discrete preference")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--j", type=int, default=settings.items)
    p.add_argument("--seed", type=int, default=settings.seed)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("design-discrete", help="design K codebooks for a preference file")
    p.add_argument("--pref", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--method", choices=["kmeanspp", "dca", "single", "exhaustive"], default="kmeanspp")
    p.add_argument("--grid-step", type=float, default=0.02)
    _design_flags(p)
    p.set_defaults(handler=cmd_design_discrete)

    p = sub.add_parser("design-continuous", help="design K codebooks for a preference density")
    p.add_argument("--spec", default=None, help="preference spec file")
    p.add_argument("--kind", choices=["uniform", "radial", "dirichlet"], default="uniform")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--alpha", default=None, help="dirichlet concentrations, comma separated")
    p.add_argument("--center", default=None, help="radial center, comma separated")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--method", choices=["saa", "sampling_kmeanspp", "sampling_dca", "exact_n3"], default="saa")
    p.add_argument("--sample-size", type=int, default=None)
    p.add_argument("--eval-size", type=int, default=None)
    p.add_argument("--samples-out", default=None)
    _design_flags(p)
    p.set_defaults(handler=cmd_design_continuous)

    p = sub.add_parser("design-twouser", help="common and exclusive codebooks for two users")
    p.add_argument("--pref", required=True)
    p.add_argument("--joint", default=None, help="joint preference (.csv or .json)")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--budget", type=int, nargs=2, default=[4, 4], metavar=("K1", "K2"))
    p.add_argument("--method", choices=["kmeanspp2u", "dca2u"], default="kmeanspp2u")
    _design_flags(p)
    p.set_defaults(handler=cmd_design_twouser)

    p = sub.add_parser("encode", help="encode one item")
    p.add_argument("--codebooks", default=None)
    p.add_argument("--item", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--raw", action="store_true", help="item is a raw byte file (N=256)")
    p.add_argument("--self-decodable", action="store_true")
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser("decode", help="decode one stream")
    p.add_argument("--codebooks", default=None)
    p.add_argument("--stream", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--raw", action="store_true", help="write the item as raw bytes")
    p.add_argument("--self-decodable", action="store_true")
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser("experiment", help="reproduce a scenario as CSV")
    p.add_argument("scenario", choices=["fig1", "continuous", "fig4", "demo"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-values", default=None, help="e.g. 3,4,5")
    p.add_argument("--k-values", default=None, help="e.g. 1-10")
    p.add_argument("--alphas", default=None, help="e.g. 0,0.5,1")
    p.add_argument("--preferences", default=None, help="uniform,radial")
    p.add_argument("--methods", default=None)
    p.add_argument("--budget", type=int, nargs=2, default=None, metavar=("K1", "K2"))
    p.add_argument("--items", type=int, default=None, help="J")
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--sample-size", type=int, default=None)
    p.add_argument("--eval-size", type=int, default=None)
    p.add_argument("--grid-step", type=float, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--twouser-restarts", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(handler=cmd_experiment)
    return parser


# ═══════════════════════════════════════════════════════════════
#  ENTRY POINT
# ═══════════════════════════════════════════════════════════════

def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_file)
    logger = RunLogger("cli")

    if args.verb in ("encode", "decode") and not args.self_decodable and not args.codebooks:
        logger.log_error("Invalid Arguments", ConfigError("--codebooks is required"), {})
        return 2

    try:
        args.handler(args, logger)
    except Exception as e:
        code = exit_code_for(e)
        logger.log_error(type(e).__name__, e, {
            "module": "cli", "function": args.verb,
            "traceback": traceback.format_exc() if code == 1 else "",
        })
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
