"""Compare the compiled Monte Carlo kernel against the numpy fallback.

Runs the same seeded simulation through both backends, checks the outputs
are bit-identical, and reports wall-clock throughput. Usage:

    python benchmarks/bench_mc.py [--frames N]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

CASE = """
import time, sys
import molrelay as mr

UM = 1e-6
D = 2.2e-11
K = 30

def link(d_um, v, tau):
    return mr.DiffusionLink(d_um * UM, v, D, degradation_rate=0.2, slot_duration=tau)

chains = {
    "direct": mr.ChainConfig(
        hops=(link(30, 1e-5, 2.5),),
        emissions=(mr.EmissionSchedule.constant(150, K),),
        prior=0.5, msi=mr.MsiParams(20, 20), num_slots=K),
    "dual-pinned": mr.ChainConfig(
        hops=(link(15, 8e-6, 2.5), link(15, 8e-6, 2.5)),
        emissions=tuple(mr.EmissionSchedule.constant(150, K + 1) for _ in range(2)),
        prior=0.5, msi=mr.MsiParams(20, 20), num_slots=K, pinned_relay=(0.99, 0.01)),
    "triple-computed": mr.ChainConfig(
        hops=(link(15, 7e-6, 2.5), link(10, 7e-6, 2.5), link(12, 7e-6, 2.5)),
        emissions=tuple(mr.EmissionSchedule.constant(q, K + 2) for q in (60, 45, 70)),
        prior=0.4, msi=mr.MsiParams(20, 15), num_slots=K),
}

frames = int(sys.argv[1])
print(f"backend={mr.mc_backend()}")
for name, cfg in chains.items():
    t0 = time.perf_counter()
    rep = mr.simulate_chain(mr.SimConfig(chain=cfg, frames=frames, seed=42))
    dt = time.perf_counter() - t0
    print(f"{name} {dt:.4f} {rep.pe!r} {rep.pd!r} {rep.pfa!r}")
"""


def run(backend: str, frames: int) -> dict[str, tuple[float, str]]:
    env = dict(os.environ, MOLRELAY_MC_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", CASE, str(frames)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    lines = proc.stdout.strip().splitlines()
    out: dict[str, tuple[float, str]] = {}
    for line in lines[1:]:
        name, dt, rest = line.split(" ", 2)
        out[name] = (float(dt), rest)
    return out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=200_000)
    args = parser.parse_args()

    t0 = time.perf_counter()
    compiled = run("compiled", args.frames)
    python = run("python", args.frames)
    total = time.perf_counter() - t0

    print(f"{args.frames} frames per case, {total:.1f}s total")
    print(f"{'case':<18}{'compiled s':>12}{'python s':>12}{'speedup':>9}  identical")
    bad = False
    for name in compiled:
        ct, cres = compiled[name]
        pt, pres = python[name]
        same = cres == pres
        bad |= not same
        print(f"{name:<18}{ct:>12.3f}{pt:>12.3f}{pt / ct:>9.2f}x  {same}")
    if bad:
        print("MISMATCH: backends disagree", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
