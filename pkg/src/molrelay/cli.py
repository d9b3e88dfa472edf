"""Config-driven experiment runner emitting CSV.

``molrelay <kind> --config <path> [--seed N] [--out <path>]``

Kinds:

``roc``
    Destination ROC at the last source slot: threshold grid -> (pfa, pd).
``pe-vs-drift``
    Drift-velocity sweep: analytic slot-averaged error probability next to
    a Monte Carlo estimate with its Wilson 95% half-width.
``threshold-sweep``
    Error probability versus a fixed decision threshold at the destination
    (last source slot), upstream nodes at their operating points.
``capacity-vs-noise``
    Capacity and optimizing prior versus MSI variance.
``capacity-vs-slot``
    Capacity and optimizing prior versus slot duration.
``budget-sweep``
    Total molecule budget split across transmitters on a fixed step grid;
    capacity per allocation.
``validate``
    Fast self-checks (collapse identities, quadrature vs. sampling,
    backend equality, analytic vs. Monte Carlo spot check); exits 2 if any
    check fails.

Config format: ``key = value`` lines under ``[chain]``, ``[sweep]`` and
``[output]`` headers. Units: distances in micrometers (``distances_um``),
times in seconds, drift velocity in meters per second. Unknown keys are
rejected with the offending line. CSV output: header row, 12-significant-
digit floats, LF line endings, one row per grid point; rows that cannot be
evaluated carry a non-empty ``flag`` instead of crashing the sweep.

Exit status: 0 success, 1 config error, 2 numerical error (or failed
validation). ``MOLRELAY_THREADS`` caps sweep concurrency.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .capacity import capacity, mutual_information
from .channel import DiffusionLink, arrival_probability
from .detection import brute_force_prior_ratio, effective_prior_ratio
from .errors import (
    ConfigError,
    MolrelayError,
    NumericalError,
    ParameterError,
    UninformativeRelayError,
)
from .moments import EmissionSchedule, MsiParams
from .montecarlo import SimConfig, mc_backend, simulate_chain
from .performance import (
    ChainConfig,
    brute_force_relayed_rates,
    error_probability,
    relayed_rates,
    roc_sweep,
    system_metrics,
)

KINDS = (
    "roc",
    "pe-vs-drift",
    "threshold-sweep",
    "capacity-vs-noise",
    "capacity-vs-slot",
    "budget-sweep",
    "validate",
)

_CHAIN_KEYS = {
    "distances_um",
    "drift_velocity",
    "diffusion_coefficient",
    "degradation_rate",
    "slot_duration",
    "molecules",
    "prior",
    "msi_mean",
    "msi_variance",
    "num_slots",
    "relay1_pd",
    "relay1_pfa",
}
_SWEEP_KEYS = {"variable", "min", "max", "step", "total", "frames", "seed"}
_OUTPUT_KEYS = {"path"}

_AXIS_NAME = {
    "roc": "gamma",
    "threshold-sweep": "gamma",
    "pe-vs-drift": "drift_velocity",
    "capacity-vs-noise": "msi_variance",
    "capacity-vs-slot": "slot_duration",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One parsed experiment: kind, chain, sweep axis, output path, seed."""

    kind: str
    chain: ChainConfig | None
    sweep_min: float | None
    sweep_max: float | None
    sweep_step: float | None
    budget_total: int | None
    frames: int
    seed: int
    out_path: str


def _find_line(raw: str, section: str, key: str) -> str:
    """Quote the config line holding ``key`` inside ``[section]``."""
    in_section = False
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            in_section = stripped[1:-1].strip().lower() == section
            continue
        if in_section:
            head = stripped.split("=", 1)[0].strip().lower()
            if head == key:
                return f"line {lineno}: {stripped}"
    return f"[{section}] {key}"


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _get(cp, section, key, conv, default=None, required=False, path=""):
    if not cp.has_option(section, key):
        if required:
            raise ConfigError(f"{path}: missing required key '{key}' in [{section}]")
        return default
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: bad value for [{section}] {key} = {raw!r}: {exc}") from exc


def _build_chain(cp: configparser.ConfigParser, path: str) -> ChainConfig:
    sec = "chain"
    dists = _get(cp, sec, "distances_um", _floats, required=True, path=path)
    v = _get(cp, sec, "drift_velocity", float, required=True, path=path)
    difc = _get(cp, sec, "diffusion_coefficient", float, required=True, path=path)
    alpha = _get(cp, sec, "degradation_rate", float, default=0.0, path=path)
    tau = _get(cp, sec, "slot_duration", float, required=True, path=path)
    mols = _get(cp, sec, "molecules", _floats, required=True, path=path)
    prior = _get(cp, sec, "prior", float, default=0.5, path=path)
    msi_mean = _get(cp, sec, "msi_mean", float, default=0.0, path=path)
    msi_var = _get(cp, sec, "msi_variance", float, default=0.0, path=path)
    num_slots = _get(cp, sec, "num_slots", int, required=True, path=path)
    pd1 = _get(cp, sec, "relay1_pd", float, path=path)
    pfa1 = _get(cp, sec, "relay1_pfa", float, path=path)
    if (pd1 is None) != (pfa1 is None):
        raise ConfigError(f"{path}: relay1_pd and relay1_pfa must be set together")
    n_tx = len(dists)
    if len(mols) == 1:
        mols = mols * n_tx
    if len(mols) != n_tx:
        raise ConfigError(
            f"{path}: molecules lists {len(mols)} values for {n_tx} transmitters"
        )
    num_relays = n_tx - 1
    hops = tuple(
        DiffusionLink(
            distance=d * 1e-6,
            drift_velocity=v,
            diffusion_coefficient=difc,
            degradation_rate=alpha,
            slot_duration=tau,
        )
        for d in dists
    )
    emissions = tuple(
        EmissionSchedule.constant(int(round(q)), num_slots + num_relays) for q in mols
    )
    return ChainConfig(
        hops=hops,
        emissions=emissions,
        prior=prior,
        msi=MsiParams(msi_mean, msi_var),
        num_slots=num_slots,
        pinned_relay=None if pd1 is None else (pd1, pfa1),
    )


def parse_config(kind: str, path: str) -> ExperimentConfig:
    """Parse and validate one experiment config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(raw, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    allowed = {"chain": _CHAIN_KEYS, "sweep": _SWEEP_KEYS, "output": _OUTPUT_KEYS}
    for section in cp.sections():
        if section not in allowed:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in cp.options(section):
            if key not in allowed[section]:
                raise ConfigError(
                    f"{path}: unknown key ({_find_line(raw, section, key)})"
                )

    needs_chain = kind != "validate"
    chain = None
    if cp.has_section("chain"):
        try:
            chain = _build_chain(cp, path)
        except ParameterError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    elif needs_chain:
        raise ConfigError(f"{path}: missing [chain] section")

    variable = _get(cp, "sweep", "variable", str, path=path)
    expected_axis = _AXIS_NAME.get(kind)
    if variable is not None and expected_axis is not None and variable != expected_axis:
        raise ConfigError(
            f"{path}: sweep variable '{variable}' does not match "
            f"'{expected_axis}' implied by kind {kind}"
        )

    smin = _get(cp, "sweep", "min", float, path=path)
    smax = _get(cp, "sweep", "max", float, path=path)
    step = _get(cp, "sweep", "step", float, path=path)
    total = _get(cp, "sweep", "total", int, path=path)
    frames = _get(cp, "sweep", "frames", int, default=100_000, path=path)
    seed = _get(cp, "sweep", "seed", int, default=0, path=path)

    if kind in _AXIS_NAME:
        if smin is None or smax is None or step is None:
            raise ConfigError(f"{path}: kind {kind} needs [sweep] min, max and step")
        if not (math.isfinite(smin) and math.isfinite(smax) and math.isfinite(step)):
            raise ConfigError(f"{path}: sweep bounds must be finite")
        if step <= 0:
            raise ConfigError(f"{path}: sweep step must be > 0, got {step}")
        if smax < smin:
            raise ConfigError(f"{path}: sweep bounds out of order (min {smin} > max {smax})")
    if kind == "budget-sweep":
        if total is None or step is None:
            raise ConfigError(f"{path}: budget-sweep needs [sweep] total and step")
        if step <= 0 or total <= 0:
            raise ConfigError(f"{path}: budget total and step must be > 0")
    if frames <= 0:
        raise ConfigError(f"{path}: frames must be > 0, got {frames}")

    out_path = _get(cp, "output", "path", str, path=path)
    return ExperimentConfig(
        kind=kind,
        chain=chain,
        sweep_min=smin,
        sweep_max=smax,
        sweep_step=step,
        budget_total=total,
        frames=frames,
        seed=seed,
        out_path=out_path or "",
    )


def _grid(lo: float, hi: float, step: float) -> list[float]:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(n)]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _write_csv(path: str, header: list[str], rows: list[tuple]) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(c) for c in row) + "\n")


def _workers(n_points: int) -> int:
    cap = os.environ.get("MOLRELAY_THREADS")
    try:
        cap_n = int(cap) if cap else (os.cpu_count() or 1)
    except ValueError:
        cap_n = 1
    return max(1, min(cap_n, n_points))


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def _map_points(fn, payloads: list, workers: int) -> list:
    """Evaluate points concurrently; results in submission order."""
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    results = [None] * len(payloads)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futures = {ex.submit(fn, p): i for i, p in enumerate(payloads)}
        for fut, i in futures.items():
            results[i] = fut.result()
    return results


def _replace_msi_variance(chain: ChainConfig, var: float) -> ChainConfig:
    return ChainConfig(
        hops=chain.hops,
        emissions=chain.emissions,
        prior=chain.prior,
        msi=MsiParams(chain.msi.mean, var),
        num_slots=chain.num_slots,
        pinned_relay=chain.pinned_relay,
    )


def _replace_slot_duration(chain: ChainConfig, tau: float) -> ChainConfig:
    hops = tuple(
        DiffusionLink(
            distance=h.distance,
            drift_velocity=h.drift_velocity,
            diffusion_coefficient=h.diffusion_coefficient,
            degradation_rate=h.degradation_rate,
            slot_duration=tau,
        )
        for h in chain.hops
    )
    return ChainConfig(
        hops=hops,
        emissions=chain.emissions,
        prior=chain.prior,
        msi=chain.msi,
        num_slots=chain.num_slots,
        pinned_relay=chain.pinned_relay,
    )


def _replace_molecules(chain: ChainConfig, counts: tuple[int, ...]) -> ChainConfig:
    n_slots = chain.num_slots + chain.num_relays
    return ChainConfig(
        hops=chain.hops,
        emissions=tuple(EmissionSchedule.constant(q, n_slots) for q in counts),
        prior=chain.prior,
        msi=chain.msi,
        num_slots=chain.num_slots,
        pinned_relay=chain.pinned_relay,
    )


# --- per-kind row builders (module-level so worker pools can pickle them) ---


def _row_pe_vs_drift(payload) -> tuple:
    chain, v, frames, seed = payload
    hops = tuple(
        DiffusionLink(
            distance=h.distance,
            drift_velocity=v,
            diffusion_coefficient=h.diffusion_coefficient,
            degradation_rate=h.degradation_rate,
            slot_duration=h.slot_duration,
        )
        for h in chain.hops
    )
    cfg = ChainConfig(
        hops=hops,
        emissions=chain.emissions,
        prior=chain.prior,
        msi=chain.msi,
        num_slots=chain.num_slots,
        pinned_relay=chain.pinned_relay,
    )
    try:
        rep = system_metrics(cfg)
        sim = simulate_chain(SimConfig(chain=cfg, frames=frames, seed=seed))
    except UninformativeRelayError as exc:
        return (v, None, None, None, f"error:{type(exc).__name__}")
    flag = "" if rep.gaussian_regime else "regime"
    return (v, rep.avg_pe, sim.pe, sim.pe_halfwidth, flag)


def _row_capacity(payload) -> tuple:
    chain, kind, value = payload
    if kind == "capacity-vs-noise":
        cfg = _replace_msi_variance(chain, value)
    else:
        cfg = _replace_slot_duration(chain, value)
    try:
        res = capacity(cfg)
    except MolrelayError as exc:
        return (value, None, None, f"error:{type(exc).__name__}")
    return (value, res.capacity, res.beta_star, "")


def _row_budget(payload) -> tuple:
    chain, alloc = payload
    cfg = _replace_molecules(chain, alloc)
    try:
        res = capacity(cfg)
    except MolrelayError as exc:
        return (*alloc, None, f"error:{type(exc).__name__}")
    return (*alloc, res.capacity, "")


def _budget_allocations(total: int, step: int, parts: int) -> list[tuple[int, ...]]:
    """Positive multiples of ``step`` over ``parts`` transmitters summing to total."""
    if total % step != 0:
        raise ConfigError(f"budget total {total} is not a multiple of step {step}")
    units = total // step
    out: list[tuple[int, ...]] = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            if remaining >= 1:
                out.append(tuple((*prefix, remaining * step)))
            return
        for take in range(1, remaining - slots + 2):
            rec((*prefix, take * step), remaining - take, slots - 1)

    rec((), units, parts)
    return out


def _run_roc(exp: ExperimentConfig) -> tuple[list[str], list[tuple]]:
    grid = _grid(exp.sweep_min, exp.sweep_max, exp.sweep_step)
    pts = roc_sweep(exp.chain, grid)
    rows = [(g, pfa, pd, "") for g, pfa, pd in pts]
    return ["threshold", "pfa", "pd", "flag"], rows


def _run_threshold_sweep(exp: ExperimentConfig) -> tuple[list[str], list[tuple]]:
    grid = _grid(exp.sweep_min, exp.sweep_max, exp.sweep_step)
    beta = exp.chain.prior
    rows = []
    for g, pfa, pd in roc_sweep(exp.chain, grid):
        rows.append((g, error_probability(pd, pfa, beta), ""))
    return ["gamma", "pe", "flag"], rows


def _run_pe_vs_drift(exp: ExperimentConfig) -> tuple[list[str], list[tuple]]:
    grid = _grid(exp.sweep_min, exp.sweep_max, exp.sweep_step)
    payloads = [
        (exp.chain, v, exp.frames, _point_seed(exp.seed, i))
        for i, v in enumerate(grid)
    ]
    rows = _map_points(_row_pe_vs_drift, payloads, _workers(len(grid)))
    return ["v", "pe_analytic", "pe_mc", "ci_halfwidth", "flag"], rows


def _run_capacity(exp: ExperimentConfig) -> tuple[list[str], list[tuple]]:
    grid = _grid(exp.sweep_min, exp.sweep_max, exp.sweep_step)
    payloads = [(exp.chain, exp.kind, value) for value in grid]
    rows = _map_points(_row_capacity, payloads, _workers(len(grid)))
    return ["sweep_value", "capacity", "beta_star", "flag"], rows


def _run_budget_sweep(exp: ExperimentConfig) -> tuple[list[str], list[tuple]]:
    parts = len(exp.chain.hops)
    allocations = _budget_allocations(exp.budget_total, int(exp.sweep_step), parts)
    payloads = [(exp.chain, alloc) for alloc in allocations]
    rows = _map_points(_row_budget, payloads, _workers(len(allocations)))
    header = [f"q{i}" for i in range(parts)] + ["capacity", "flag"]
    return header, rows


def _default_validation_chain() -> ChainConfig:
    hop = DiffusionLink(
        distance=15e-6,
        drift_velocity=7e-6,
        diffusion_coefficient=2.2e-11,
        degradation_rate=0.2,
        slot_duration=2.0,
    )
    return ChainConfig(
        hops=(hop, hop),
        emissions=(
            EmissionSchedule.constant(100, 31),
            EmissionSchedule.constant(100, 31),
        ),
        prior=0.5,
        msi=MsiParams(20.0, 20.0),
        num_slots=30,
        pinned_relay=(0.99, 0.01),
    )


def _run_validate(exp: ExperimentConfig) -> tuple[list[str], list[tuple]]:
    rng = np.random.default_rng(exp.seed)
    rows: list[tuple] = []

    def check(name, ok, detail):
        rows.append((name, "ok" if ok else "fail", detail))

    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        beta = float(rng.uniform(0.05, 0.95))
        ups = tuple(
            (float(rng.uniform(0.55, 0.999)), float(rng.uniform(0.001, 0.45)))
            for _ in range(n)
        )
        try:
            a = effective_prior_ratio(beta, ups[-1]).value
            b = brute_force_prior_ratio(beta, ups).value
            worst = max(worst, abs(a - b))
        except UninformativeRelayError:
            continue
    check("prior_ratio_collapse", worst <= 1e-12, f"max|delta|={worst:.3e}")

    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        ups = [
            (float(rng.uniform(0.5, 1.0)), float(rng.uniform(0.0, 0.5)))
            for _ in range(n)
        ]
        a_up, b_up = float(rng.uniform(0, 1)), float(rng.uniform(0, 1))
        pd_f, pfa_f = brute_force_relayed_rates(ups, a_up, b_up)
        last = ups[-1]
        pd_c = last[0] * a_up + (1 - last[0]) * b_up
        pfa_c = last[1] * a_up + (1 - last[1]) * b_up
        worst = max(worst, abs(pd_f - pd_c), abs(pfa_f - pfa_c))
    check("relayed_rates_collapse", worst <= 1e-12, f"max|delta|={worst:.3e}")

    worst = 0.0
    for _ in range(50):
        pfa = float(rng.uniform(1e-6, 0.5 - 1e-6))
        h2 = -(pfa * math.log2(pfa) + (1 - pfa) * math.log2(1 - pfa))
        worst = max(worst, abs(mutual_information(1 - pfa, pfa, 0.5) - (1 - h2)))
    check("bsc_identity", worst <= 1e-10, f"max|delta|={worst:.3e}")

    worst_z = 0.0
    for _ in range(3):
        link = DiffusionLink(
            distance=float(rng.uniform(5e-6, 40e-6)),
            drift_velocity=float(rng.uniform(3e-6, 3e-5)),
            diffusion_coefficient=2.2e-11,
            degradation_rate=float(rng.uniform(0.0, 0.5)),
            slot_duration=float(rng.uniform(1.0, 4.0)),
        )
        lag = int(rng.integers(0, 3))
        q_quad = arrival_probability(link, lag)
        n = 1_000_000
        t = rng.wald(link.mean_hitting_time, link.shape, size=n)
        w = np.exp(-link.degradation_rate * t) * (
            (t >= lag * link.slot_duration) & (t < (lag + 1) * link.slot_duration)
        )
        est = float(np.mean(w))
        se = float(np.std(w) / math.sqrt(n))
        z = abs(est - q_quad) / max(se, 1e-300)
        worst_z = max(worst_z, z)
    check("arrival_quadrature_vs_sampling", worst_z <= 4.0, f"max|z|={worst_z:.2f}")

    cfg = exp.chain or _default_validation_chain()
    base = simulate_chain(SimConfig(chain=cfg, frames=2000, seed=exp.seed))
    if mc_backend() == "compiled":
        env_key = "MOLRELAY_MC_BACKEND"
        prev = os.environ.get(env_key)
        os.environ[env_key] = "python"
        try:
            alt = simulate_chain(SimConfig(chain=cfg, frames=2000, seed=exp.seed))
        finally:
            if prev is None:
                os.environ.pop(env_key, None)
            else:
                os.environ[env_key] = prev
        same = (
            base.pe == alt.pe and base.pd == alt.pd and base.pfa == alt.pfa
        )
        check("mc_backend_equality", same, f"pe {base.pe!r} vs {alt.pe!r}")
    else:
        rows.append(("mc_backend_equality", "skipped", "compiled kernel not built"))

    rep = system_metrics(cfg)
    sim = simulate_chain(SimConfig(chain=cfg, frames=exp.frames, seed=exp.seed))
    gap = abs(rep.avg_pe - sim.pe)
    ok = gap <= 3 * sim.pe_halfwidth
    check(
        "analytic_vs_mc_spot",
        ok,
        f"|{rep.avg_pe:.6f}-{sim.pe:.6f}|={gap:.2e} hw={sim.pe_halfwidth:.2e}",
    )
    return ["check", "status", "detail"], rows


def run_experiment(exp: ExperimentConfig) -> int:
    """Run one experiment, write its CSV, return the process exit code."""
    runners = {
        "roc": _run_roc,
        "threshold-sweep": _run_threshold_sweep,
        "pe-vs-drift": _run_pe_vs_drift,
        "capacity-vs-noise": _run_capacity,
        "capacity-vs-slot": _run_capacity,
        "budget-sweep": _run_budget_sweep,
        "validate": _run_validate,
    }
    header, rows = runners[exp.kind](exp)
    if not exp.out_path:
        raise ConfigError("no output path: set [output] path or pass --out")
    _write_csv(exp.out_path, header, rows)
    if exp.kind == "validate" and any(r[1] == "fail" for r in rows):
        return 2
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; config errors are exit 1
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="molrelay",
        description=(
            "Diffusive molecular communication link experiments. "
            "Units: distances_um in micrometers, slot_duration in seconds, "
            "drift_velocity in meters per second, diffusion_coefficient in "
            "m^2/s, degradation_rate in 1/s."
        ),
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run the {kind} experiment")
        sp.add_argument("--config", required=True, help="path to the INI config")
        sp.add_argument("--seed", type=int, default=None, help="override [sweep] seed")
        sp.add_argument("--out", default=None, help="override [output] path")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        exp = parse_config(args.kind, args.config)
        if args.seed is not None:
            exp = ExperimentConfig(**{**exp.__dict__, "seed": args.seed})
        if args.out is not None:
            exp = ExperimentConfig(**{**exp.__dict__, "out_path": args.out})
        code = run_experiment(exp)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except UninformativeRelayError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    if exp.kind == "validate" and code != 0:
        print("validation failed; see CSV for details", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
