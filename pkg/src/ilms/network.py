"""Network description, per-node data statistics and seeded data generators.

Each node k of the ring observes ``d_k(i) = u_k(i) w_o + v_k(i)`` where the
regressor ``u_k(i)`` is zero-mean Gaussian with covariance ``R_k`` and the
noise ``v_k(i)`` is zero-mean Gaussian with variance ``sigma2_k``.

Two data fields are supported.  ``"complex"`` (the default) draws circular
complex Gaussian regressors and noise, for which the fourth-order moment used
by the mean-square theory is exact.  ``"real"`` draws real Gaussian data; its
fourth moment carries an extra ``Lambda^2`` term the theory does not model,
so transient curves sit slightly above the theoretical ones.
"""

import functools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import FactorizationError, ValidationError
from .matlib import as_matrix, as_vector, toeplitz_ar1

FIELDS = ("complex", "real")
DEFAULT_FIELD = "complex"
DEFAULT_JITTER = 0.5

NETWORK_KEYS = frozenset(
    {"m", "n", "mu", "snr_db", "correlation", "noise_profile", "w_o", "seed",
     "jitter", "field"}
)

_SEED_MASK = (1 << 64) - 1


class RandomStream:
    """Deterministic 64-bit random stream with a Box-Muller normal transform.

    Uniforms come from a PCG64 generator keyed by ``(seed, *key)``.  Normals
    are produced in Box-Muller pairs and the unused half of a pair is kept for
    the next call, so the sequence of normals does not depend on how draws are
    batched.
    """

    def __init__(self, seed, key=()):
        self.seed = int(seed) & _SEED_MASK
        self.key = tuple(int(k) for k in key)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.PCG64(seq))
        self._spare = None

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, key={self.key})"

    def spawn(self, *key):
        """Independent child stream identified by ``key`` (e.g. replica, node)."""
        return RandomStream(self.seed, self.key + tuple(key))

    def uniform(self, size=None):
        """Uniform draws on the half-open interval (0, 1]."""
        return 1.0 - self._gen.random(size)

    def normal(self, size=None):
        """Standard normal draws via Box-Muller; ``size`` is an int or shape."""
        if size is None:
            return float(self.normal(1)[0])
        shape = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
        n = math.prod(shape)
        out = np.empty(n)
        start = 0
        if n and self._spare is not None:
            out[0] = self._spare
            self._spare = None
            start = 1
        rest = n - start
        if rest:
            pairs = (rest + 1) // 2
            u = self.uniform(2 * pairs)
            radius = np.sqrt(-2.0 * np.log(u[0::2]))
            angle = 2.0 * np.pi * u[1::2]
            z = np.empty(2 * pairs)
            z[0::2] = radius * np.cos(angle)
            z[1::2] = radius * np.sin(angle)
            out[start:] = z[:rest]
            if 2 * pairs > rest:
                self._spare = z[-1]
        return out.reshape(shape)


@dataclass(frozen=True, eq=False)
class NodeProfile:
    """Statistics of one node: step size, noise variance, input covariance."""

    step_size: float
    noise_variance: float
    input_covariance: np.ndarray

    def __post_init__(self):
        if not (np.isfinite(self.step_size) and self.step_size >= 0):
            raise ValidationError(f"step size must be >= 0, got {self.step_size}")
        if not (np.isfinite(self.noise_variance) and self.noise_variance >= 0):
            raise ValidationError(
                f"noise variance must be >= 0, got {self.noise_variance}"
            )
        cov = as_matrix(self.input_covariance, "input covariance")
        if cov.shape[0] != cov.shape[1]:
            raise ValidationError("input covariance must be square")
        if np.max(np.abs(cov - cov.T)) > 1e-12:
            raise ValidationError("input covariance must be symmetric")
        cov.setflags(write=False)
        object.__setattr__(self, "step_size", float(self.step_size))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))
        object.__setattr__(self, "input_covariance", cov)
        _ = self.cholesky_factor

    @property
    def filter_length(self):
        return self.input_covariance.shape[0]

    @functools.cached_property
    def cholesky_factor(self):
        """Lower-triangular L with ``L L^T = R`` (computed once)."""
        try:
            factor = np.linalg.cholesky(self.input_covariance)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(
                "input covariance is not positive definite"
            ) from exc
        factor.setflags(write=False)
        return factor


@dataclass(frozen=True, eq=False)
class NetworkConfig:
    """Ordered ring of nodes plus the unknown vector ``w_o``.

    Node order in ``nodes`` is the order of the Hamiltonian cycle.
    """

    nodes: tuple
    true_weights: np.ndarray
    field: str = DEFAULT_FIELD
    metadata: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if not nodes:
            raise ValidationError("network needs at least one node")
        w_o = as_vector(self.true_weights, "w_o")
        m = w_o.shape[0]
        if m < 1:
            raise ValidationError("filter length must be >= 1")
        for k, node in enumerate(nodes):
            if node.filter_length != m:
                raise ValidationError(
                    f"node {k} covariance is {node.filter_length}x"
                    f"{node.filter_length}, expected {m}x{m}"
                )
        if self.field not in FIELDS:
            raise ValidationError(f"field must be one of {FIELDS}, got {self.field!r}")
        w_o.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "true_weights", w_o)

    @property
    def num_nodes(self):
        return len(self.nodes)

    @property
    def filter_length(self):
        return self.true_weights.shape[0]

    @property
    def step_sizes(self):
        return np.array([node.step_size for node in self.nodes])

    @property
    def noise_variances(self):
        return np.array([node.noise_variance for node in self.nodes])

    def rotated(self, shift):
        """Same network with the ring starting ``shift`` nodes later."""
        shift %= self.num_nodes
        nodes = self.nodes[shift:] + self.nodes[:shift]
        return NetworkConfig(nodes, self.true_weights, self.field, dict(self.metadata))

    def with_noise_scaled(self, factor):
        """Copy with every noise variance multiplied by ``factor``."""
        nodes = tuple(
            NodeProfile(p.step_size, p.noise_variance * factor, p.input_covariance)
            for p in self.nodes
        )
        return NetworkConfig(nodes, self.true_weights, self.field, dict(self.metadata))


def noise_floor(snr_db):
    """Noise variance for a unit-power signal at the given SNR in dB."""
    return 10.0 ** (-snr_db / 10.0)


def build_network(m, n, mu, snr_db, correlation=0.0, noise_profile=None,
                  w_o=None, stream=None, jitter=DEFAULT_JITTER,
                  field=DEFAULT_FIELD):
    """Build an N-node ring with AR(1) input covariance at every node.

    Parameters
    ----------
    m, n : int
        Filter length M and number of nodes N.
    mu : float or sequence of float
        Common step size or one step size per node.
    snr_db : float
        Sets the nominal noise variance ``10**(-snr_db/10)``.
    correlation : float
        AR(1) correlation of the regressor taps (0 gives white input).
    noise_profile : sequence of float, optional
        Explicit per-node noise variances; overrides ``snr_db`` and ``jitter``.
    w_o : sequence of float, optional
        Unknown vector; defaults to the unit-norm ``ones(m) / sqrt(m)``.
    stream : RandomStream, optional
        Source of the noise jitter (defaults to seed 0).
    jitter : float
        Half-width of the relative uniform noise jitter; 0 disables it.
    field : {"complex", "real"}
        Data field used by the simulator.
    """
    if int(m) != m or int(n) != n or m < 1 or n < 1:
        raise ValidationError(f"m and n must be positive integers, got m={m}, n={n}")
    m, n = int(m), int(n)
    cov = toeplitz_ar1(m, correlation)

    mus = np.atleast_1d(np.asarray(mu, dtype=np.float64))
    if mus.shape == (1,):
        mus = np.full(n, mus[0])
    if mus.shape != (n,):
        raise ValidationError(f"mu must be a scalar or have {n} entries")

    if noise_profile is not None:
        noise = as_vector(noise_profile, "noise_profile")
        if noise.shape != (n,):
            raise ValidationError(f"noise_profile must have {n} entries")
        if np.any(noise < 0):
            raise ValidationError("noise_profile entries must be nonnegative")
    else:
        if not 0 <= jitter < 1:
            raise ValidationError(f"jitter must lie in [0, 1), got {jitter}")
        noise = np.full(n, noise_floor(snr_db))
        if jitter > 0:
            stream = stream if stream is not None else RandomStream(0)
            offsets = jitter * (2.0 * stream.uniform(n) - 1.0)
            noise = noise * (1.0 + offsets)

    if w_o is None:
        w_o = np.ones(m) / np.sqrt(m)
    w_o = as_vector(w_o, "w_o")
    if w_o.shape != (m,):
        raise ValidationError(f"w_o must have {m} entries")

    nodes = tuple(NodeProfile(mus[k], noise[k], cov) for k in range(n))
    return NetworkConfig(nodes, w_o, field)


def network_from_dict(doc, extra_keys=()):
    """Build a NetworkConfig from a parsed JSON document.

    Unknown keys are rejected unless listed in ``extra_keys``.
    """
    if not isinstance(doc, dict):
        raise ValidationError("network config must be a JSON object")
    unknown = set(doc) - NETWORK_KEYS - set(extra_keys)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    missing = {"m", "n", "mu", "snr_db"} - set(doc)
    if doc.get("noise_profile") is not None:
        missing.discard("snr_db")
    if missing:
        raise ValidationError(f"missing config keys: {sorted(missing)}")
    try:
        return build_network(
            doc["m"], doc["n"], doc["mu"], doc.get("snr_db", 0.0),
            correlation=doc.get("correlation", 0.0),
            noise_profile=doc.get("noise_profile"),
            w_o=doc.get("w_o"),
            stream=RandomStream(doc.get("seed", 0), key=(0,)),
            jitter=doc.get("jitter", DEFAULT_JITTER),
            field=doc.get("field", DEFAULT_FIELD),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from exc


def regressor_width(field):
    """Normals consumed per regressor draw for a filter of length 1."""
    return 2 if field == "complex" else 1


def generate_regressor(profile, stream, field=DEFAULT_FIELD):
    """Draw one regressor with covariance ``profile.input_covariance``.

    For the complex field the regressor is circular: ``E[u^H u] = R`` and
    ``E[u^T u] = 0``.
    """
    m = profile.filter_length
    L = profile.cholesky_factor
    if field == "complex":
        g = stream.normal(2 * m)
        return L @ (g[:m] + 1j * g[m:]) / np.sqrt(2.0)
    if field == "real":
        return L @ stream.normal(m)
    raise ValidationError(f"field must be one of {FIELDS}, got {field!r}")


def generate_observation(profile, regressor, w_o, stream):
    """Noisy scalar observation ``u . w_o + v`` for one node.

    The noise is circular complex when the regressor has a complex dtype.
    """
    u = np.asarray(regressor)
    w_o = np.asarray(w_o)
    if u.shape != w_o.shape:
        raise ValidationError(f"regressor shape {u.shape} != w_o shape {w_o.shape}")
    scale = np.sqrt(profile.noise_variance)
    if np.iscomplexobj(u):
        g = stream.normal(2)
        noise = scale * (g[0] + 1j * g[1]) / np.sqrt(2.0)
    else:
        noise = scale * stream.normal(1)[0]
    return u @ w_o + noise
