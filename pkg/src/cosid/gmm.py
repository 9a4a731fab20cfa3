"""Diagonal-covariance Gaussian mixture speaker models.

Models are trained per speaker with EM (k-means++ seeded initialization,
variance flooring) and scored as log-likelihood sums over observation
sequences. A single argmax over enrolled models is the closed-set
identification decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GmmModel:
    speaker_id: str
    weights: np.ndarray  # (K,), simplex
    means: np.ndarray  # (K, D)
    variances: np.ndarray  # (K, D), floored positive
    ll_history: tuple = ()  # total training log-likelihood per EM iteration
    n_component_resets: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("weights must be a simplex")
        if np.any(np.asarray(self.variances) <= 0):
            raise ValueError("variances must be positive")
        if self.means.shape != self.variances.shape or len(w) != self.means.shape[0]:
            raise ValueError("inconsistent parameter shapes")

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class SpeakerSet:
    models: tuple

    def __post_init__(self):
        ids = [m.speaker_id for m in self.models]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate speaker ids")
        dims = {m.dim for m in self.models}
        if len(dims) > 1:
            raise ValueError("models disagree on feature dimension")

    def __len__(self):
        return len(self.models)

    def __getitem__(self, i) -> GmmModel:
        return self.models[i]

    @property
    def speaker_ids(self) -> list[str]:
        return [m.speaker_id for m in self.models]


def _component_log_densities(model: GmmModel, X: np.ndarray) -> np.ndarray:
    """(M, K) matrix of log w_k + log N(x_m; mu_k, diag sigma2_k)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.dim:
        raise ValueError(f"expected {model.dim}-dim vectors, got {X.shape[1]}")
    log_norm = -0.5 * (model.dim * _LOG_2PI + np.log(model.variances).sum(axis=1))
    diff = X[:, None, :] - model.means[None, :, :]
    quad = -0.5 * np.sum(diff * diff / model.variances[None, :, :], axis=2)
    return np.log(model.weights)[None, :] + log_norm[None, :] + quad


def frame_log_densities(model: GmmModel, X) -> np.ndarray:
    """Per-frame mixture log density, log-sum-exp over components."""
    return logsumexp(_component_log_densities(model, X), axis=1)


def log_density(model: GmmModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite observation")
    return float(frame_log_densities(model, x[None, :])[0])


def sequence_log_likelihood(model: GmmModel, obs) -> float:
    """Total log-likelihood of an observation sequence (sum over frames)."""
    obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
    if obs.shape[0] == 0:
        raise ValueError("empty observation sequence")
    return float(np.sum(frame_log_densities(model, obs)))


def sid_decide(speakers: SpeakerSet, obs) -> str:
    """Closed-set decision: speaker whose model scores highest; ties go to
    the lowest enrolled index."""
    if len(speakers) == 0:
        raise ValueError("empty speaker set")
    scores = [sequence_log_likelihood(m, obs) for m in speakers.models]
    return speakers[int(np.argmax(scores))].speaker_id


def _kmeans_pp_centers(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    centers = np.empty((k, data.shape[1]))
    centers[0] = data[rng.integers(n)]
    d2 = np.sum((data - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[j] = data[rng.integers(n)]
        else:
            centers[j] = data[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((data - centers[j]) ** 2, axis=1))
    return centers


def train_gmm(
    data,
    n_components: int,
    seed: int,
    max_iters: int = 100,
    tol: float = 1e-5,
    variance_floor_frac: float = 1e-3,
    speaker_id: str = "",
) -> GmmModel:
    """Fit a diagonal-covariance mixture with EM.

    Stops when the per-frame log-likelihood improves by less than `tol`
    or after `max_iters` iterations. Variances are floored at
    `variance_floor_frac` of the per-dimension global variance; a
    component whose responsibility mass collapses is reset to the global
    mean with the global (inflated) variance and counted, not fatal.
    Same data and seed give a bit-identical model.
    """
    X = np.atleast_2d(np.asarray(data, dtype=np.float64))
    n, dim = X.shape
    if n < 10 * n_components:
        raise ValueError(
            f"need at least {10 * n_components} vectors to fit {n_components} "
            f"components, got {n}"
        )
    rng = np.random.default_rng(seed)
    global_mean = X.mean(axis=0)
    global_var = X.var(axis=0)
    floor = np.maximum(variance_floor_frac * global_var, 1e-12)

    means = _kmeans_pp_centers(X, n_components, rng)
    assign = np.argmin(
        ((X[:, None, :] - means[None, :, :]) ** 2).sum(axis=2), axis=1
    )
    weights = np.empty(n_components)
    variances = np.empty((n_components, dim))
    for k in range(n_components):
        members = X[assign == k]
        weights[k] = max(len(members), 1) / n
        if len(members) > 0:
            means[k] = members.mean(axis=0)
            variances[k] = np.maximum(members.var(axis=0), floor)
        else:
            variances[k] = np.maximum(global_var, floor)
    weights /= weights.sum()

    model = GmmModel(speaker_id=speaker_id, weights=weights, means=means,
                     variances=variances)
    history = []
    n_resets = 0
    prev_per_frame = -np.inf
    for _ in range(max_iters):
        joint = _component_log_densities(model, X)  # (n, K)
        per_frame = logsumexp(joint, axis=1)
        total_ll = float(np.sum(per_frame))
        history.append(total_ll)
        if total_ll / n - prev_per_frame < tol and np.isfinite(prev_per_frame):
            break
        prev_per_frame = total_ll / n

        resp = np.exp(joint - per_frame[:, None])
        mass = resp.sum(axis=0)
        collapsed = mass < 1e-6 * n
        safe_mass = np.where(collapsed, 1.0, mass)
        new_means = (resp.T @ X) / safe_mass[:, None]
        new_sq = (resp.T @ (X * X)) / safe_mass[:, None]
        new_vars = np.maximum(new_sq - new_means**2, floor)
        new_weights = mass / n
        for k in np.flatnonzero(collapsed):
            n_resets += 1
            new_means[k] = global_mean
            new_vars[k] = np.maximum(global_var, floor)
            new_weights[k] = 1.0 / n
        new_weights /= new_weights.sum()
        model = GmmModel(speaker_id=speaker_id, weights=new_weights,
                         means=new_means, variances=new_vars)

    return GmmModel(
        speaker_id=speaker_id,
        weights=model.weights,
        means=model.means,
        variances=model.variances,
        ll_history=tuple(history),
        n_component_resets=n_resets,
    )


def save_model(model: GmmModel, path) -> None:
    """Portable text format: header `K dim speaker_id`, then one weights
    row, K mean rows and K variance rows at 17 significant digits."""
    if any(ch.isspace() for ch in model.speaker_id):
        raise ValueError("speaker_id must not contain whitespace")
    lines = [f"{model.n_components} {model.dim} {model.speaker_id}"]
    lines.append(" ".join(f"{v:.17g}" for v in model.weights))
    for row in model.means:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    for row in model.variances:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> GmmModel:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    k_str, dim_str, speaker_id = lines[0].split(maxsplit=2)
    k, dim = int(k_str), int(dim_str)
    if len(lines) != 2 + 2 * k:
        raise ValueError(f"{path}: expected {2 + 2 * k} lines, got {len(lines)}")
    weights = np.array([float(v) for v in lines[1].split()])
    means = np.array([[float(v) for v in lines[2 + i].split()] for i in range(k)])
    variances = np.array(
        [[float(v) for v in lines[2 + k + i].split()] for i in range(k)]
    )
    if weights.shape != (k,) or means.shape != (k, dim) or variances.shape != (k, dim):
        raise ValueError(f"{path}: malformed model file")
    return GmmModel(speaker_id=speaker_id, weights=weights, means=means,
                    variances=variances)
