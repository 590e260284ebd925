"""Fully-connected binary scorer with hand-derived forward and backward passes.

Layout: dense(input_dim -> hidden_dim) -> batch norm -> ReLU -> dropout ->
dense(hidden_dim -> 1) -> sigmoid. Logits are clipped to +-LOGIT_BOUND so scores stay
strictly inside (0, 1). All arithmetic runs in float64 so the
analytic gradients can be checked tightly against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Literal, Optional, Tuple

import numpy as np
from scipy.special import expit

from tapauc.exceptions import ConfigurationError, ContractViolationError, NumericalError
from tapauc.schemas.network import NetworkConfig

Mode = Literal["train", "eval"]
Gradients = Dict[str, np.ndarray]

PARAMETER_NAMES = (
    "layer1_weights",
    "layer1_bias",
    "bn_scale",
    "bn_shift",
    "layer2_weights",
    "layer2_bias",
)

BN_MOMENTUM = 0.1
BN_EPSILON = 1e-5

# expit of this logit is still strictly below 1.0 in float64
LOGIT_BOUND = 36.0


@dataclass
class MlpModel:
    """Parameters and batch-norm running statistics of the scorer.

    ``layer2_bias`` is stored as a one-element array so every parameter can be
    updated with the same vectorized optimizer code. ``version`` increases with
    each optimizer step and lets ``backward`` reject caches from older parameters.
    """

    config: NetworkConfig
    layer1_weights: np.ndarray
    layer1_bias: np.ndarray
    bn_scale: np.ndarray
    bn_shift: np.ndarray
    bn_running_mean: np.ndarray
    bn_running_var: np.ndarray
    layer2_weights: np.ndarray
    layer2_bias: np.ndarray
    version: int = 0

    def parameters(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}

    def copy(self) -> MlpModel:
        arrays = {name: getattr(self, name).copy() for name in PARAMETER_NAMES}
        arrays["bn_running_mean"] = self.bn_running_mean.copy()
        arrays["bn_running_var"] = self.bn_running_var.copy()
        return replace(self, **arrays)


@dataclass
class OptimizerState:
    first_moment: Dict[str, np.ndarray]
    second_moment: Dict[str, np.ndarray]
    step_count: int = 0
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_model(cls, model: MlpModel, learning_rate: float = 0.01) -> OptimizerState:
        zeros = {name: np.zeros_like(value) for name, value in model.parameters().items()}
        return cls(
            first_moment=zeros,
            second_moment={name: np.zeros_like(value) for name, value in zeros.items()},
            learning_rate=learning_rate,
        )


@dataclass
class ForwardCache:
    """Intermediate values of one forward call, consumed by ``backward``.

    In eval mode the dropout mask is all ones and ``batch_mean``/``batch_var``
    hold the running statistics that were used.
    """

    mode: Mode
    model_version: int
    inputs: np.ndarray
    pre_activation: np.ndarray
    normalized: Optional[np.ndarray]
    bn_output: np.ndarray
    activation: np.ndarray
    dropout_mask: np.ndarray
    hidden: np.ndarray
    logits: np.ndarray
    scores: np.ndarray
    batch_mean: Optional[np.ndarray] = None
    batch_var: Optional[np.ndarray] = None
    inv_std: Optional[np.ndarray] = field(default=None, repr=False)


def _check_config(config: NetworkConfig) -> None:
    input_dim = getattr(config, "input_dim", None)
    hidden_dim = getattr(config, "hidden_dim", None)
    dropout_rate = getattr(config, "dropout_rate", None)
    if not isinstance(input_dim, int) or input_dim < 1:
        raise ConfigurationError(f"input_dim must be a positive integer, got {input_dim!r}")
    if not isinstance(hidden_dim, int) or hidden_dim < 1:
        raise ConfigurationError(f"hidden_dim must be a positive integer, got {hidden_dim!r}")
    if dropout_rate is None or not 0.0 <= dropout_rate < 1.0:
        raise ConfigurationError(f"dropout_rate must lie in [0, 1), got {dropout_rate!r}")


def init_network(config: NetworkConfig, seed: int) -> MlpModel:
    """Fan-in scaled uniform weights, zero biases, identity batch norm."""
    _check_config(config)
    rng = np.random.default_rng(seed)
    input_dim, hidden_dim = config.input_dim, config.hidden_dim

    # He-uniform for the ReLU layer, LeCun-uniform for the sigmoid head
    limit1 = np.sqrt(6.0 / input_dim)
    limit2 = np.sqrt(3.0 / hidden_dim)
    return MlpModel(
        config=config,
        layer1_weights=rng.uniform(-limit1, limit1, size=(hidden_dim, input_dim)),
        layer1_bias=np.zeros(hidden_dim),
        bn_scale=np.ones(hidden_dim),
        bn_shift=np.zeros(hidden_dim),
        bn_running_mean=np.zeros(hidden_dim),
        bn_running_var=np.ones(hidden_dim),
        layer2_weights=rng.uniform(-limit2, limit2, size=(1, hidden_dim)),
        layer2_bias=np.zeros(1),
    )


def _as_batch(batch: np.ndarray, input_dim: int) -> np.ndarray:
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != input_dim:
        raise ContractViolationError(
            f"expected a batch of shape (n, {input_dim}), got {x.shape}"
        )
    if x.shape[0] == 0:
        raise ContractViolationError("empty batch")
    return x


def forward(
    model: MlpModel,
    batch: np.ndarray,
    mode: Mode = "train",
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, ForwardCache]:
    """Score a batch.

    Train mode normalizes with batch statistics and folds them into the running
    statistics (momentum ``BN_MOMENTUM``, unbiased variance); it needs ``rng``
    when dropout is enabled. Eval mode only reads the model.
    """
    if mode not in ("train", "eval"):
        raise ContractViolationError(f"unknown mode {mode!r}")
    config = model.config
    x = _as_batch(batch, config.input_dim)
    n = x.shape[0]
    if mode == "train" and config.use_batchnorm and n < 2:
        raise ContractViolationError("train-mode batch norm needs at least 2 rows")

    pre_activation = x @ model.layer1_weights.T + model.layer1_bias

    normalized = batch_mean = batch_var = inv_std = None
    if config.use_batchnorm:
        if mode == "train":
            batch_mean = pre_activation.mean(axis=0)
            batch_var = pre_activation.var(axis=0)
            model.bn_running_mean = (1.0 - BN_MOMENTUM) * model.bn_running_mean + BN_MOMENTUM * batch_mean
            model.bn_running_var = (1.0 - BN_MOMENTUM) * model.bn_running_var + BN_MOMENTUM * (
                batch_var * n / (n - 1)
            )
        else:
            batch_mean = model.bn_running_mean
            batch_var = model.bn_running_var
        inv_std = 1.0 / np.sqrt(batch_var + BN_EPSILON)
        normalized = (pre_activation - batch_mean) * inv_std
        bn_output = model.bn_scale * normalized + model.bn_shift
    else:
        bn_output = pre_activation

    activation = np.maximum(bn_output, 0.0)

    if mode == "train" and config.dropout_rate > 0.0:
        if rng is None:
            raise ContractViolationError("train-mode dropout needs a random generator")
        keep = 1.0 - config.dropout_rate
        dropout_mask = (rng.random(activation.shape) < keep) / keep
    else:
        dropout_mask = np.ones_like(activation)

    hidden = activation * dropout_mask
    logits = hidden @ model.layer2_weights[0] + model.layer2_bias[0]
    scores = expit(np.clip(logits, -LOGIT_BOUND, LOGIT_BOUND))

    cache = ForwardCache(
        mode=mode,
        model_version=model.version,
        inputs=x,
        pre_activation=pre_activation,
        normalized=normalized,
        bn_output=bn_output,
        activation=activation,
        dropout_mask=dropout_mask,
        hidden=hidden,
        logits=logits,
        scores=scores,
        batch_mean=batch_mean,
        batch_var=batch_var,
        inv_std=inv_std,
    )
    return scores, cache


def backward(model: MlpModel, cache: ForwardCache, score_gradients: np.ndarray) -> Gradients:
    """Gradients of ``sum(scores * score_gradients)`` with respect to every parameter."""
    if cache.model_version != model.version:
        raise ContractViolationError(
            f"cache was produced by model version {cache.model_version}, model is at {model.version}"
        )
    if cache.inputs.shape[1] != model.config.input_dim or cache.hidden.shape[1] != model.config.hidden_dim:
        raise ContractViolationError("cache shapes do not match the model")
    upstream = np.asarray(score_gradients, dtype=np.float64).reshape(-1)
    if upstream.shape[0] != cache.scores.shape[0]:
        raise ContractViolationError(
            f"got {upstream.shape[0]} score gradients for a batch of {cache.scores.shape[0]}"
        )

    # the clip is passed straight through: s(1 - s) of the bounded score stays positive
    scores = cache.scores
    d_logits = upstream * scores * (1.0 - scores)

    grads: Gradients = {
        "layer2_weights": (d_logits @ cache.hidden)[np.newaxis, :],
        "layer2_bias": np.array([d_logits.sum()]),
    }

    d_hidden = np.outer(d_logits, model.layer2_weights[0])
    d_activation = d_hidden * cache.dropout_mask
    d_bn_output = d_activation * (cache.bn_output > 0.0)

    if model.config.use_batchnorm:
        grads["bn_scale"] = (d_bn_output * cache.normalized).sum(axis=0)
        grads["bn_shift"] = d_bn_output.sum(axis=0)
        d_normalized = d_bn_output * model.bn_scale
        if cache.mode == "train":
            # batch statistics depend on the inputs, so their path is included
            n = d_normalized.shape[0]
            d_pre_activation = (cache.inv_std / n) * (
                n * d_normalized
                - d_normalized.sum(axis=0)
                - cache.normalized * (d_normalized * cache.normalized).sum(axis=0)
            )
        else:
            d_pre_activation = d_normalized * cache.inv_std
    else:
        grads["bn_scale"] = np.zeros_like(model.bn_scale)
        grads["bn_shift"] = np.zeros_like(model.bn_shift)
        d_pre_activation = d_bn_output

    grads["layer1_weights"] = d_pre_activation.T @ cache.inputs
    grads["layer1_bias"] = d_pre_activation.sum(axis=0)
    return grads


def adam_step(
    model: MlpModel, grads: Gradients, state: OptimizerState
) -> Tuple[MlpModel, OptimizerState]:
    """One bias-corrected Adam update. Running batch-norm statistics are carried over untouched."""
    if state.step_count < 0:
        raise ContractViolationError("step_count must be non-negative")
    for name in PARAMETER_NAMES:
        if name not in grads:
            raise ContractViolationError(f"missing gradient for {name}")
        if grads[name].shape != getattr(model, name).shape:
            raise ContractViolationError(
                f"gradient for {name} has shape {grads[name].shape}, expected {getattr(model, name).shape}"
            )
        if not np.all(np.isfinite(grads[name])):
            raise NumericalError(f"non-finite gradient for {name}")

    step = state.step_count + 1
    first_correction = 1.0 - state.beta1**step
    second_correction = 1.0 - state.beta2**step

    updated = model.copy()
    first_moment: Dict[str, np.ndarray] = {}
    second_moment: Dict[str, np.ndarray] = {}
    for name in PARAMETER_NAMES:
        grad = grads[name]
        m = state.beta1 * state.first_moment[name] + (1.0 - state.beta1) * grad
        v = state.beta2 * state.second_moment[name] + (1.0 - state.beta2) * grad * grad
        m_hat = m / first_correction
        v_hat = v / second_correction
        setattr(
            updated,
            name,
            getattr(model, name) - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon),
        )
        first_moment[name] = m
        second_moment[name] = v
    updated.version = model.version + 1

    return updated, replace(
        state, first_moment=first_moment, second_moment=second_moment, step_count=step
    )


def predict_scores(model: MlpModel, features: np.ndarray) -> np.ndarray:
    scores, _ = forward(model, features, mode="eval")
    return scores
