"""Monte Carlo simulation of incremental LMS around the ring.

At every iteration the estimate visits nodes 1..N in ring order; node k
applies ``w_k = w_{k-1} + mu_k e_k u_k^H`` with ``e_k = d_k - u_k w_{k-1}``
and the sweep output is ``w(i) = w_N(i)``.  Learning curves are recorded once
per sweep, starting from ``w(0) = 0``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, ValidationError
from .matlib import jacobi_eig
from .network import RandomStream, generate_observation, generate_regressor

DIVERGENCE_LIMIT = 1e12
# leading spawn-key component separating simulation streams from config streams
SIM_STREAM_TAG = 1
# target number of (replica, iteration, node) draws held in memory per chunk
_CHUNK_DRAWS = 500_000


@dataclass
class FilterState:
    estimate: np.ndarray
    iteration: int = 0


@dataclass
class SimResult:
    """Replica-averaged learning curves, indexed by iteration 0..I."""

    msd: np.ndarray
    emse: np.ndarray
    num_replicas: int
    msd_sem: np.ndarray
    per_node_msd: np.ndarray = None

    @property
    def msd_db(self):
        return to_db(self.msd)

    @property
    def emse_db(self):
        return to_db(self.emse)

    @property
    def per_node_final_msd(self):
        if self.per_node_msd is None:
            return None
        return self.per_node_msd[-1]


def to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def node_streams(master_seed, replica, num_nodes):
    """Per-node streams for one replica, derived from (master seed, replica)."""
    root = RandomStream(master_seed, key=(SIM_STREAM_TAG, replica))
    return [root.spawn(k) for k in range(num_nodes)]


def initial_state(config):
    dtype = np.complex128 if config.field == "complex" else np.float64
    return FilterState(np.zeros(config.filter_length, dtype=dtype), 0)


def ilms_sweep(config, state, streams):
    """One full pass of the estimate around the ring.

    Draws ``(u_k, d_k)`` from ``streams[k]`` at each node and returns the
    state holding ``w_N``.  Raises DivergenceError if the estimate leaves the
    finite range.
    """
    w = np.array(state.estimate)
    if w.shape != (config.filter_length,):
        raise ValidationError(
            f"estimate has shape {w.shape}, expected ({config.filter_length},)"
        )
    if len(streams) != config.num_nodes:
        raise ValidationError("need one stream per node")
    if config.field == "complex":
        w = w.astype(np.complex128)
    iteration = state.iteration + 1
    with np.errstate(over="ignore", invalid="ignore"):
        for node, stream in zip(config.nodes, streams):
            u = generate_regressor(node, stream, config.field)
            d = generate_observation(node, u, config.true_weights, stream)
            e = d - u @ w
            w = w + node.step_size * e * np.conj(u)
    if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > DIVERGENCE_LIMIT:
        raise DivergenceError(
            f"estimate diverged at iteration {iteration}", iteration=iteration
        )
    return FilterState(w, iteration)


def _emse_weights(config):
    """Eigenvalues and eigenvectors of the last node's input covariance."""
    lam, H = jacobi_eig(config.nodes[-1].input_covariance)
    return lam, H


def _sq_norms(err, lam, H):
    """Per-replica ||err||^2 and ||H^T err||^2_Lambda for err of shape (R, M)."""
    msd = np.sum(np.abs(err) ** 2, axis=-1)
    emse = np.sum(lam * np.abs(err @ H) ** 2, axis=-1)
    return msd, emse


def monte_carlo(config, iterations, replicas, master_seed=0, per_node=False):
    """Average MSD/EMSE learning curves over independent replicas.

    Replica r draws from ``node_streams(master_seed, r, N)``, so its path
    does not depend on how many other replicas run alongside it.

    Parameters
    ----------
    config : NetworkConfig
    iterations : int
        Number of ring sweeps; curves have ``iterations + 1`` entries.
    replicas : int
        Number of independent runs averaged.
    master_seed : int
    per_node : bool
        Also record the MSD after every node update (shape ``(I, N)``).

    Returns
    -------
    SimResult
    """
    if iterations < 1 or replicas < 1:
        raise ValidationError("iterations and replicas must be >= 1")
    n, m, R = config.num_nodes, config.filter_length, replicas
    is_complex = config.field == "complex"
    width = 2 * m + 2 if is_complex else m + 1
    dtype = np.complex128 if is_complex else np.float64

    lam, H = _emse_weights(config)
    w_o = config.true_weights
    mus = config.step_sizes
    chol_t = np.stack([node.cholesky_factor.T for node in config.nodes])
    white = np.array_equal(chol_t, np.broadcast_to(np.eye(m), chol_t.shape))
    noise_sd = np.sqrt(config.noise_variances)

    streams = [node_streams(master_seed, r, n) for r in range(R)]
    w = np.zeros((R, m), dtype=dtype)

    msd_rep = np.empty((R, iterations + 1))
    emse_rep = np.empty((R, iterations + 1))
    msd_rep[:, 0], emse_rep[:, 0] = _sq_norms(w_o - w, lam, H)
    node_msd = np.empty((iterations, n)) if per_node else None

    chunk = max(1, min(iterations, _CHUNK_DRAWS // (R * n)))
    done = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while done < iterations:
            size = min(chunk, iterations - done)
            g = np.empty((R, size, n, width))
            for r in range(R):
                for k in range(n):
                    g[r, :, k, :] = streams[r][k].normal((size, width))
            if is_complex:
                z = (g[..., :m] + 1j * g[..., m:2 * m]) / np.sqrt(2.0)
                v = (g[..., 2 * m] + 1j * g[..., 2 * m + 1]) / np.sqrt(2.0)
            else:
                z, v = g[..., :m], g[..., m]
            # u[t, k, r] = L_k z[r, t, k], laid out so each step reads a contiguous block
            u = np.ascontiguousarray(z.transpose(1, 2, 0, 3))
            if not white:
                u = u @ chol_t
            d = u @ w_o + noise_sd[None, :, None] * v.transpose(1, 2, 0)
            step = mus[None, :, None, None] * (np.conj(u) if is_complex else u)
            for t in range(size):
                for k in range(n):
                    e = d[t, k] - np.sum(u[t, k] * w, axis=-1)
                    w += e[:, None] * step[t, k]
                    if per_node:
                        node_msd[done + t, k] = np.mean(
                            np.sum(np.abs(w_o - w) ** 2, axis=-1)
                        )
                i = done + t + 1
                mag = np.abs(w)
                bad = ~np.isfinite(mag).all(axis=-1) | (mag.max(axis=-1) > DIVERGENCE_LIMIT)
                if bad.any():
                    r = int(np.argmax(bad))
                    raise DivergenceError(
                        f"replica {r} diverged at iteration {i}",
                        iteration=i, replica=r,
                    )
                msd_rep[:, i], emse_rep[:, i] = _sq_norms(w_o - w, lam, H)
            done += size

    msd = msd_rep.mean(axis=0)
    emse = emse_rep.mean(axis=0)
    if R > 1:
        sem = msd_rep.std(axis=0, ddof=1) / np.sqrt(R)
    else:
        sem = np.zeros(iterations + 1)
    return SimResult(msd, emse, R, sem, node_msd)


def run_single(config, iterations, master_seed=0, replica=0):
    """Reference path: repeated ``ilms_sweep`` for one replica, MSD per sweep."""
    streams = node_streams(master_seed, replica, config.num_nodes)
    state = initial_state(config)
    msd = [float(np.sum(np.abs(config.true_weights - state.estimate) ** 2))]
    for _ in range(iterations):
        state = ilms_sweep(config, state, streams)
        msd.append(float(np.sum(np.abs(config.true_weights - state.estimate) ** 2)))
    return np.array(msd), state
