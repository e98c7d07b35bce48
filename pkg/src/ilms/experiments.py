"""Theory-versus-simulation experiments and the steady-state summary table."""

import logging
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import output
from .errors import ILMSError, InstabilityError, ValidationError
from .network import DEFAULT_FIELD, DEFAULT_JITTER, NETWORK_KEYS, network_from_dict
from .simulator import monte_carlo, to_db
from .theory import MARGINAL_TOL, build_chain, plateau, steady_state, theory_curves

log = logging.getLogger(__name__)

RUN_KEYS = frozenset({"iterations", "replicas", "label"})
DEFAULT_REPLICAS = 200
PLATEAU_FRACTION = 0.1
CONSISTENCY_DB = 1e-6

TABLE1_SNRS = (10.0, 20.0, 30.0)
TABLE1_STEPS = (5e-3, 5e-2)
TABLE1_DATA = (("white", 0.0), ("correlated", 0.4))


def default_iterations(mu):
    """Sweep budget long enough for the slowest node to reach its plateau."""
    return 50_000 if np.min(mu) < 0.01 else 5_000


@dataclass
class ExperimentSpec:
    label: str
    m: int
    n: int
    mu: object
    snr_db: float = 0.0
    correlation: float = 0.0
    noise_profile: list = None
    w_o: list = None
    seed: int = 0
    jitter: float = DEFAULT_JITTER
    field: str = DEFAULT_FIELD
    iterations: int = None
    replicas: int = DEFAULT_REPLICAS

    def __post_init__(self):
        if self.iterations is None:
            self.iterations = default_iterations(self.mu)
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValidationError("iterations must be a positive integer")
        if int(self.replicas) != self.replicas or self.replicas < 1:
            raise ValidationError("replicas must be a positive integer")
        self.iterations = int(self.iterations)
        self.replicas = int(self.replicas)

    @classmethod
    def from_dict(cls, doc, label="experiment"):
        unknown = set(doc) - NETWORK_KEYS - RUN_KEYS
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        doc = dict(doc)
        doc.setdefault("label", label)
        missing = {"m", "n", "mu"} - set(doc)
        if missing:
            raise ValidationError(f"missing config keys: {sorted(missing)}")
        return cls(**doc)

    def network_dict(self):
        doc = {k: v for k, v in asdict(self).items() if k in NETWORK_KEYS}
        return {k: v for k, v in doc.items() if v is not None}

    def network(self):
        return network_from_dict(self.network_dict())


@dataclass
class ComparisonReport:
    label: str
    sim_msd_db: np.ndarray
    theory_msd_db: np.ndarray
    sim_emse_db: np.ndarray
    theory_emse_db: np.ndarray
    sim_plateau_db: float
    closed_form_plateau_db: float
    steady_state_db: float
    spectral_radius: float
    stable: bool
    degenerate: bool
    common_eigenbasis: bool
    replicas: int
    extras: dict = field(default_factory=dict)

    @property
    def delta_db(self):
        return self.sim_msd_db - self.theory_msd_db

    @property
    def max_transient_delta_db(self):
        return float(np.max(np.abs(self.delta_db)))

    @property
    def steady_delta_db(self):
        return self.sim_plateau_db - self.steady_state_db

    @property
    def consistent(self):
        """Closed-form plateau equals the steady-state solve (stable runs)."""
        if not self.stable:
            return True
        return abs(self.closed_form_plateau_db - self.steady_state_db) < CONSISTENCY_DB

    def summary(self):
        return {
            "label": self.label,
            "sim_plateau_db": self.sim_plateau_db,
            "closed_form_plateau_db": self.closed_form_plateau_db,
            "steady_state_db": self.steady_state_db,
            "steady_delta_db": self.steady_delta_db,
            "max_transient_delta_db": self.max_transient_delta_db,
            "spectral_radius": self.spectral_radius,
            "stable": self.stable,
            "degenerate": self.degenerate,
            "common_eigenbasis": self.common_eigenbasis,
            "replicas": self.replicas,
            "iterations": len(self.sim_msd_db) - 1,
        }


def _labelled(exc, label):
    exc.args = (f"[{label}] {exc.args[0] if exc.args else exc}",) + exc.args[1:]
    return exc


def plateau_db(curve):
    """dB of the mean of the final 10% of a linear learning curve."""
    tail = max(1, int(round(PLATEAU_FRACTION * (len(curve) - 1))))
    return float(to_db(np.mean(curve[-tail:])))


def run_experiment(spec):
    """Simulate and evaluate the theory for one scenario, aligned by iteration."""
    try:
        config = spec.network()
        chain = build_chain(config)
        rho = chain.spectral_radius
        degenerate = bool(np.all(config.step_sizes == 0))
        if rho > 1.0 + MARGINAL_TOL:
            raise InstabilityError(
                f"spectral radius {rho:.6g} >= 1; the mean-square recursion diverges",
                spectral_radius=rho,
            )
        if not chain.common_eigenbasis:
            log.warning("%s: nodes do not share an eigenbasis; theory is approximate",
                        spec.label)
        theory = theory_curves(chain, config.true_weights, spec.iterations)
        sim = monte_carlo(config, spec.iterations, spec.replicas, spec.seed)
        if chain.stable:
            closed, _ = plateau(chain, config.true_weights, chain.msd_weighting())
            steady = steady_state(chain, chain.msd_weighting())
            closed_form_db, steady_state_db = float(to_db(closed)), float(to_db(steady))
        else:
            closed_form_db = steady_state_db = float("nan")
    except ILMSError as exc:
        raise _labelled(exc, spec.label)

    report = ComparisonReport(
        label=spec.label,
        sim_msd_db=sim.msd_db,
        theory_msd_db=theory.msd_db,
        sim_emse_db=sim.emse_db,
        theory_emse_db=theory.emse_db,
        sim_plateau_db=plateau_db(sim.msd),
        closed_form_plateau_db=closed_form_db,
        steady_state_db=steady_state_db,
        spectral_radius=rho,
        stable=chain.stable,
        degenerate=degenerate,
        common_eigenbasis=chain.common_eigenbasis,
        replicas=spec.replicas,
    )
    if not report.consistent:
        raise ILMSError(f"[{spec.label}] closed-form plateau {closed_form_db} dB "
                        f"disagrees with steady state {steady_state_db} dB")
    return report


def write_report(report, out_dir):
    """Write ``<out_dir>/<label>/comparison.csv`` and ``summary.json``."""
    target = os.path.join(out_dir, report.label)
    os.makedirs(target, exist_ok=True)
    rows = zip(range(len(report.sim_msd_db)), report.sim_msd_db,
               report.theory_msd_db, report.delta_db, report.sim_emse_db,
               report.theory_emse_db)
    output.write_csv(
        os.path.join(target, "comparison.csv"),
        ["iteration", "sim_msd_db", "theory_msd_db", "delta_db",
         "sim_emse_db", "theory_emse_db"],
        ([str(i), *vals] for i, *vals in rows),
    )
    output.write_json(os.path.join(target, "summary.json"), report.summary())
    return target


@dataclass
class Table1Row:
    data_type: str
    snr_db: float
    step_size: float
    sim_db: float
    closed_form_db: float
    steady_state_db: float
    stable: bool


def table1_suite(seed=0, replicas=0, iterations=None, jitter=DEFAULT_JITTER,
                 field=DEFAULT_FIELD, m=4, n=20):
    """Steady-state MSD for the 12 (input, SNR, step size) scenarios.

    ``replicas=0`` skips the simulation column (left as NaN).  The noise
    jitter is drawn from ``seed`` and is the same across rows, so rows differ
    only in input correlation, SNR scale and step size.
    """
    rows = []
    for data_type, corr in TABLE1_DATA:
        for snr in TABLE1_SNRS:
            for mu in TABLE1_STEPS:
                doc = {"m": m, "n": n, "mu": mu, "snr_db": snr, "correlation": corr,
                       "seed": seed, "jitter": jitter, "field": field}
                config = network_from_dict(doc)
                chain = build_chain(config)
                closed = steady = sim = float("nan")
                if chain.stable:
                    value, _ = plateau(chain, config.true_weights, chain.msd_weighting())
                    closed = float(to_db(value))
                    steady = float(to_db(steady_state(chain, chain.msd_weighting())))
                    if abs(closed - steady) >= CONSISTENCY_DB:
                        raise ILMSError(
                            f"{data_type}/{snr}dB/mu={mu}: closed-form plateau "
                            f"{closed} dB != steady state {steady} dB"
                        )
                else:
                    log.warning("%s/%sdB/mu=%s is unstable", data_type, snr, mu)
                if replicas > 0 and chain.stable:
                    budget = iterations or default_iterations(mu)
                    result = monte_carlo(config, budget, replicas, seed)
                    sim = plateau_db(result.msd)
                rows.append(Table1Row(data_type, snr, mu, sim, closed, steady, chain.stable))
    return rows


def write_table1_csv(path, rows):
    output.write_csv(
        path,
        ["data_type", "snr_db", "step_size", "sim_db", "eq19_db", "eq22_db"],
        ([r.data_type, r.snr_db, r.step_size, r.sim_db, r.closed_form_db,
          r.steady_state_db] for r in rows),
    )
