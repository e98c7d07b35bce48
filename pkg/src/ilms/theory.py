"""Mean and mean-square theory of incremental LMS.

All quantities live in the eigenbasis of the node input covariances.  A node
update maps a weighting vector ``sigma`` to ``F_k sigma`` with

    F_k = I - 2 mu_k Lambda_k + mu_k^2 (Lambda_k^2 + lambda_k lambda_k^T)

and injects noise energy ``sigma2_k mu_k^2 lambda_k^T sigma``.  Chaining the
ring gives the per-sweep pair ``(F_bar, B)``::

    F_bar_k = F_1 F_2 ... F_k
    B_k     = B_{k-1} F_k + sigma2_k mu_k^2 lambda_k^T

from which the learning curve follows in closed form (``transient_curve``)
and the steady state solves ``B (I - F_bar)^{-1} sigma``.

The per-node eigenbases are used as-is when chaining; the results are exact
only when all nodes share one eigenbasis (e.g. identical covariances).
``TheoryChain.common_eigenbasis`` reports whether that holds.
"""

import functools
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InstabilityError, SingularMatrixError, ValidationError
from .matlib import as_matrix, as_vector, jacobi_eig, solve_linear

# tolerance on rho(F_bar) - 1 below which dynamics count as marginal (mu = 0)
MARGINAL_TOL = 1e-12


@dataclass(frozen=True)
class SpectralData:
    """Per-node eigenvalues (descending) and eigenvectors of R_k."""

    eigenvalues: tuple
    eigenvectors: tuple

    @classmethod
    def from_config(cls, config):
        cache = {}
        lams, vecs = [], []
        for node in config.nodes:
            key = node.input_covariance.tobytes()
            if key not in cache:
                lam, H = jacobi_eig(node.input_covariance)
                if np.any(lam <= 0):
                    raise ValidationError("input covariance must be positive definite")
                cache[key] = (lam, H)
            lams.append(cache[key][0])
            vecs.append(cache[key][1])
        return cls(tuple(lams), tuple(vecs))

    def __len__(self):
        return len(self.eigenvalues)

    def eigenvalue_matrix(self, k):
        return np.diag(self.eigenvalues[k])


def mean_stability_bound(spectral, k):
    """Largest step size keeping the mean recursion at node k contractive."""
    return 2.0 / spectral.eigenvalues[k][0]


def mean_recursion_matrix(spectral, mu, k):
    """``I - mu Lambda_k``, the transition of the mean weight error at node k."""
    return np.eye(len(spectral.eigenvalues[k])) - mu * spectral.eigenvalue_matrix(k)


def transition_matrix(lam, mu, moment_factor=1.0):
    """F for eigenvalues ``lam``; ``moment_factor`` scales the Lambda^2 term.

    ``moment_factor=1`` is the circular complex Gaussian case; real Gaussian
    data corresponds to 2.
    """
    lam = as_vector(lam, "eigenvalues")
    return (np.eye(lam.shape[0]) - 2.0 * mu * np.diag(lam)
            + mu ** 2 * (moment_factor * np.diag(lam ** 2) + np.outer(lam, lam)))


def build_F(spectral, mu, k, moment_factor=1.0):
    if mu < 0:
        raise ValidationError("step size must be nonnegative")
    return transition_matrix(spectral.eigenvalues[k], mu, moment_factor)


def spectral_radius(a, tol=1e-12, max_iters=10_000, seed=0, squarings=8):
    """Dominant eigenvalue magnitude by power iteration.

    The iteration runs on ``a**(2**squarings)`` (formed by repeated squaring
    with rescaling) so that nearly tied eigenvalues separate quickly; the
    result is mapped back with a ``2**squarings``-th root.
    """
    a = as_matrix(a)
    m = a.shape[0]
    if a.shape != (m, m):
        raise ValidationError("matrix must be square")
    p = a.copy()
    log_scale = 0.0
    for _ in range(squarings):
        s = np.linalg.norm(p)
        if s == 0.0:
            return 0.0
        p = p / s
        p = p @ p
        log_scale = 2.0 * (log_scale + np.log(s))

    x = np.random.default_rng(seed).standard_normal(m)
    x /= np.linalg.norm(x)
    estimate = None
    for _ in range(max_iters):
        y = p @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        if estimate is not None and abs(norm - estimate) <= tol * norm:
            return float(np.exp((log_scale + np.log(norm)) / 2 ** squarings))
        estimate = norm
    raise ConvergenceError(f"power iteration did not converge in {max_iters} steps")


@dataclass(frozen=True, eq=False)
class TheoryChain:
    """Per-node transition matrices and their ring-ordered accumulations."""

    F: tuple
    F_bar: np.ndarray
    B: np.ndarray
    F_bar_partial: tuple
    B_partial: tuple
    noise_terms: tuple
    spectral: SpectralData
    common_eigenbasis: bool

    @property
    def num_nodes(self):
        return len(self.F)

    @property
    def filter_length(self):
        return self.F_bar.shape[0]

    @functools.cached_property
    def spectral_radius(self):
        return spectral_radius(self.F_bar)

    @property
    def stable(self):
        return self.spectral_radius < 1.0

    def msd_weighting(self):
        return np.ones(self.filter_length)

    def emse_weighting(self):
        return np.array(self.spectral.eigenvalues[-1])

    def to_eigenbasis(self, w_o):
        """Coordinates of the initial error ``w_o - 0`` in node N's eigenbasis."""
        return self.spectral.eigenvectors[-1].T @ as_vector(w_o, "w_o")


FIELD_MOMENT_FACTOR = {"complex": 1.0, "real": 2.0}


def build_chain(config, spectral=None, moment_factor=None):
    """Chain F_k and the noise row vectors around the ring in node order.

    ``moment_factor`` defaults to the value matching ``config.field``.
    """
    if moment_factor is None:
        moment_factor = FIELD_MOMENT_FACTOR[config.field]
    if spectral is None:
        spectral = SpectralData.from_config(config)
    if len(spectral) != config.num_nodes:
        raise ValidationError("spectral data does not match the network")
    m = config.filter_length
    F_list, F_bars, Bs, terms = [], [], [], []
    F_bar = np.eye(m)
    B = np.zeros(m)
    for k, node in enumerate(config.nodes):
        Fk = build_F(spectral, node.step_size, k, moment_factor)
        term = node.noise_variance * node.step_size ** 2 * spectral.eigenvalues[k]
        F_bar = F_bar @ Fk
        B = B @ Fk + term
        terms.append(term)
        F_list.append(Fk)
        F_bars.append(F_bar)
        Bs.append(B)
    first = config.nodes[0].input_covariance
    common = all(np.allclose(n.input_covariance, first, rtol=0, atol=1e-12)
                 for n in config.nodes)
    return TheoryChain(tuple(F_list), F_bar, B, tuple(F_bars), tuple(Bs),
                       tuple(terms), spectral, common)


def _check_curve_stability(chain):
    rho = chain.spectral_radius
    if rho > 1.0 + MARGINAL_TOL:
        raise InstabilityError(
            f"spectral radius of the sweep transition is {rho:.6g} >= 1",
            spectral_radius=rho,
        )


def transient_curve(chain, w_o, weighting, iterations):
    """Closed-form learning curve ``E||w_bar_N(i)||^2_sigma`` for i = 0..I.

    Uses the one-step recursion

        c(i+1) = c(i) + B A_i sigma + ||w_o||^2_{A_i (F_bar - I) sigma},
        A_{i+1} = A_i F_bar,  A_0 = I.
    """
    _check_curve_stability(chain)
    sigma = as_vector(weighting, "weighting")
    wsq = chain.to_eigenbasis(w_o) ** 2
    m = chain.filter_length
    drift = (chain.F_bar - np.eye(m)) @ sigma
    curve = np.empty(iterations + 1)
    curve[0] = wsq @ sigma
    A = np.eye(m)
    for i in range(iterations):
        curve[i + 1] = curve[i] + chain.B @ A @ sigma + wsq @ (A @ drift)
        A = A @ chain.F_bar
    return curve


def state_space_curve(chain, w_o, weighting, iterations):
    """Learning curve by propagating the diagonal second moment node by node.

    ``z`` starts at the squared initial error in the eigenbasis and each node
    applies ``z <- F_k^T z + sigma2_k mu_k^2 lambda_k``; ``curve[i] = z . sigma``.
    """
    _check_curve_stability(chain)
    sigma = as_vector(weighting, "weighting")
    z = chain.to_eigenbasis(w_o) ** 2
    curve = np.empty(iterations + 1)
    curve[0] = z @ sigma
    for i in range(iterations):
        for Fk, b in zip(chain.F, chain.noise_terms):
            z = Fk.T @ z + b
        curve[i + 1] = z @ sigma
    return curve


def first_sweep_values(chain, w_o, weighting):
    """Value at every node after the first sweep: ``||w_o||^2_{F_bar_k sigma} + B_k sigma``."""
    sigma = as_vector(weighting, "weighting")
    wsq = chain.to_eigenbasis(w_o) ** 2
    return np.array([wsq @ (Fb @ sigma) + Bk @ sigma
                     for Fb, Bk in zip(chain.F_bar_partial, chain.B_partial)])


def steady_state(chain, weighting):
    """Steady-state value ``B (I - F_bar)^{-1} sigma``."""
    rho = chain.spectral_radius
    if rho >= 1.0:
        raise InstabilityError(
            f"no steady state: spectral radius {rho:.6g} >= 1", spectral_radius=rho
        )
    sigma = as_vector(weighting, "weighting")
    try:
        x = solve_linear(np.eye(chain.filter_length) - chain.F_bar, sigma)
    except SingularMatrixError as exc:
        raise InstabilityError(f"I - F_bar is singular: {exc}", spectral_radius=rho) from exc
    return float(chain.B @ x)


def plateau(chain, w_o, weighting, rtol=1e-12, atol=1e-300, max_iters=1_000_000):
    """Run the closed-form recursion until it settles.

    Stops at the first iteration whose increment is below
    ``rtol * |value| + atol``.  Returns ``(value, iterations_used)``.
    """
    _check_curve_stability(chain)
    sigma = as_vector(weighting, "weighting")
    wsq = chain.to_eigenbasis(w_o) ** 2
    m = chain.filter_length
    drift = (chain.F_bar - np.eye(m)) @ sigma
    value = wsq @ sigma
    A = np.eye(m)
    for i in range(max_iters):
        step = chain.B @ A @ sigma + wsq @ (A @ drift)
        value += step
        A = A @ chain.F_bar
        if abs(step) <= rtol * abs(value) + atol:
            return float(value), i + 1
    raise ConvergenceError(f"learning curve did not settle in {max_iters} iterations")


@dataclass
class LearningCurve:
    """MSD and EMSE per iteration (linear power)."""

    msd: np.ndarray
    emse: np.ndarray

    @property
    def msd_db(self):
        return 10.0 * np.log10(self.msd)

    @property
    def emse_db(self):
        return 10.0 * np.log10(self.emse)


def theory_curves(chain, w_o, iterations):
    return LearningCurve(
        transient_curve(chain, w_o, chain.msd_weighting(), iterations),
        transient_curve(chain, w_o, chain.emse_weighting(), iterations),
    )
