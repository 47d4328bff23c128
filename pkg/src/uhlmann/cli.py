"""Command-line entry point (``uhlmann``)."""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import experiment as ex
from .basisenc import controlled, embed_triplet
from .circuit.qasm import to_qasm3
from .spinsys import SpinParams, state_at, uhlmann_process
from .synth.approx import ApproximationFailure, SynthesisConfig, approx_synthesize
from .synth.transpile import transpile

SPINS = {"half": 0.5, "one": 1.0}
BENCH_EPSILONS = (1e-1, 1e-3, 1e-5, 1e-8, 1e-10, 1e-15)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--spin", choices=SPINS, default="one")
    p.add_argument("--method", choices=("naive", "optimized"), default="optimized")
    p.add_argument("--dd", action="store_true", help="insert XY4 blocks into idle windows")
    p.add_argument("--epsilon", type=float, default=None, help="approximate-synthesis tolerance")
    p.add_argument("--gateset", choices=("eagle", "heron", "generic"), default="eagle")
    p.add_argument("--noise", default="none", help="calibration JSON path, 'eagle', 'heron' or 'none'")
    p.add_argument("--shots", type=int, default=2024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=60, help="number of temperatures in [0.01, 1)")
    p.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uhlmann", description="Uhlmann-phase circuits and synthesis benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    s = sub.add_parser("sweep", parents=[common], help="temperature sweep of the phase")
    s.add_argument("--format", choices=("csv", "table"), default="csv")
    s.add_argument("--exact", action="store_true", help="infinite-shot expectations instead of sampling")
    c = sub.add_parser("counts", parents=[common], help="mean native gate counts per stage")
    c.add_argument("--format", choices=("csv", "table"), default="csv")
    sub.add_parser("prep-distance", parents=[common], help="statistical distance of the prepared register")
    b = sub.add_parser("synth-bench", parents=[common], help="approximate synthesis across tolerances")
    b.add_argument("--temperature", type=float, default=0.4)
    b.add_argument("--max-depth", type=int, default=8)
    q = sub.add_parser("export-qasm", parents=[common], help="OpenQASM 3 of the compiled circuits")
    q.add_argument("--temperature", type=float, default=0.4)
    q.add_argument("--basis", choices=("X", "Y", "both"), default="both")
    return parser


def _config(args, **kw) -> ex.SweepConfig:
    kw.setdefault("temperatures", tuple(ex.default_grid(args.grid)))
    return ex.SweepConfig(
        j=SPINS[args.spin],
        shots=args.shots,
        method=args.method,
        dd=args.dd,
        epsilon=1e-8 if args.epsilon is None else args.epsilon,
        gateset=args.gateset,
        noise=None if args.noise.lower() == "none" else args.noise,
        seed=args.seed,
        **kw,
    )


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _bench(args) -> str:
    st = state_at(SpinParams(1.0), args.temperature)
    proc = uhlmann_process(st)
    targets = {
        "CUs": controlled(embed_triplet(proc.us).full),
        "CUa": controlled(embed_triplet(proc.ua).full),
    }
    eps_list = BENCH_EPSILONS if args.epsilon is None else (args.epsilon,)
    lines = ["epsilon,cx,u3,isa_total,seconds,status"]
    for eps in eps_list:
        t0 = time.perf_counter()
        cx = u3 = isa = 0
        status = "ok"
        for name, u in targets.items():
            try:
                circ = approx_synthesize(u, SynthesisConfig(epsilon=eps, max_depth=args.max_depth, seed=args.seed))
            except ApproximationFailure as exc:
                circ, status = exc.final_circuit, f"depth-capped (best {exc.best_distance:.2e})"
            ops = circ.count_ops()
            cx += ops.get("cx", 0)
            u3 += ops.get("u3", 0)
            isa += transpile(circ, args.gateset).size()
        lines.append(f"{eps:g},{cx},{u3},{isa},{time.perf_counter() - t0:.2f},{status}")
    return "\n".join(lines) + "\n"


def _qasm(args) -> str:
    cfg = _config(args, temperatures=(args.temperature,))
    cp = ex.compile_point(args.temperature, cfg)
    chunks = []
    for basis, circ in (("X", cp.circuit_x), ("Y", cp.circuit_y)):
        if args.basis in (basis, "both"):
            chunks.append(f"// probe measured in {basis}\n" + to_qasm3(circ))
    return "\n".join(chunks)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            cfg = _config(args, expectation="exact" if args.exact else "sampled")
            records = ex.run_sweep(cfg)
            _emit(ex.report(records, args.format), args.out)
            for r in records:
                if r.failed:
                    print(f"T={r.T:.4f}: {r.status}", file=sys.stderr)
            return ex.exit_code(records)
        if args.command == "counts":
            rep = ex.gate_count_report(_config(args))
            _emit(rep.to_csv() if args.format == "csv" else rep.to_table(), args.out)
        elif args.command == "prep-distance":
            _emit(ex.prep_distance_csv(ex.state_prep_distance_sweep(_config(args))), args.out)
        elif args.command == "synth-bench":
            _emit(_bench(args), args.out)
        elif args.command == "export-qasm":
            _emit(_qasm(args), args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
