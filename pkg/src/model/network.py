"""Representation, dynamics and prediction functions with option heads.

All three functions are two-layer tanh MLPs over float64 arrays; the backward
pass through the K-step composite unroll is written out by hand.

    representation  s0 = h(x)
    dynamics        s', r = g(s, encode(A))       r predicts the decision's reward target
    prediction      Omega_2..L, p, v = f(s)

g takes no discount argument. The reward target of a composite action is
already the discounted sum of its primitive rewards (see DecisionRecord), so
the discount is applied once, when targets are built, and g just regresses it.

The value and reward heads work on targets divided by `value_scale`; `predict`
and `dynamics` multiply back, so search only ever sees environment units.
"""

from dataclasses import dataclass
from typing import Collection, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import ModelConfig
from ..env import CompositeAction
from ..errors import ModelShapeError, TrainingFault, UsageError
from .batch import UnrollBatch
from .encoding import encode_action_sequence
from .params import ModelParams, ParamLayout, build_layout

LOSS_TERMS = ("policy", "value", "reward", "option", "l2")


@dataclass(frozen=True)
class PredictionOutput:
    policy: np.ndarray
    value: float
    option_heads: np.ndarray  # (L-1, |A|+1), last column is stop


@dataclass(frozen=True)
class DynamicsOutput:
    next_state: np.ndarray
    reward: float


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    policy: float
    value: float
    reward: float
    option: float
    l2: float

    def as_dict(self) -> Dict[str, float]:
        return {
            "total": self.total,
            "policy": self.policy,
            "value": self.value,
            "reward": self.reward,
            "option": self.option,
            "l2": self.l2,
        }


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def param_layout(config: ModelConfig) -> ParamLayout:
    obs = config.observation_size
    a = config.action_space_size
    length = config.max_option_length
    d = config.hidden_size
    t = config.trunk_size
    segments = [
        ("representation.l1.weight", (t, obs)),
        ("representation.l1.bias", (t,)),
        ("representation.l2.weight", (d, t)),
        ("representation.l2.bias", (d,)),
        ("dynamics.l1.weight", (t, d + length * a)),
        ("dynamics.l1.bias", (t,)),
        ("dynamics.l2.weight", (d, t)),
        ("dynamics.l2.bias", (d,)),
        ("dynamics.reward.weight", (1, t)),
        ("dynamics.reward.bias", (1,)),
        ("prediction.trunk.weight", (t, d)),
        ("prediction.trunk.bias", (t,)),
        ("prediction.policy.weight", (a, t)),
        ("prediction.policy.bias", (a,)),
        ("prediction.value.weight", (1, t)),
        ("prediction.value.bias", (1,)),
    ]
    if length > 1:
        heads = (length - 1) * (a + 1)
        segments += [
            ("prediction.option.weight", (heads, t)),
            ("prediction.option.bias", (heads,)),
        ]
    return build_layout(segments)


def init_params(config: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """Random init; option heads start with zero weights and a stop-biased logit."""
    layout = param_layout(config)
    parts: Dict[str, np.ndarray] = {}
    for name, shape in layout.segments:
        if name.endswith(".bias"):
            parts[name] = np.zeros(shape)
        else:
            fan_in = shape[1]
            parts[name] = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=shape)
    if config.max_option_length > 1:
        a = config.action_space_size
        parts["prediction.option.weight"] = np.zeros(layout.shape_of("prediction.option.weight"))
        bias = np.zeros((config.max_option_length - 1, a + 1))
        bias[:, a] = config.stop_bias
        parts["prediction.option.bias"] = bias.ravel()
    return ModelParams(theta=layout.flatten(parts), layout=layout, version=0)


def _linear(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    return x @ weight.T + bias


class OptionZeroNetwork:
    """h, g and f bound to one immutable parameter snapshot."""

    def __init__(self, config: ModelConfig, params: ModelParams):
        if params.layout != param_layout(config):
            raise ModelShapeError("Parameters do not match model config")
        self.config = config
        self.params = params
        self.action_space_size = config.action_space_size
        self.max_option_length = config.max_option_length
        self.value_scale = config.value_scale

    @classmethod
    def initialize(cls, config: ModelConfig, rng: np.random.Generator) -> "OptionZeroNetwork":
        return cls(config, init_params(config, rng))

    def with_params(self, params: ModelParams) -> "OptionZeroNetwork":
        return OptionZeroNetwork(self.config, params)

    @property
    def version(self) -> int:
        return self.params.version

    # -- forward pieces (batched, rows are samples) --------------------------------

    def _represent(self, p: ModelParams, x: np.ndarray):
        a1 = np.tanh(_linear(x, p["representation.l1.weight"], p["representation.l1.bias"]))
        s = np.tanh(_linear(a1, p["representation.l2.weight"], p["representation.l2.bias"]))
        return s, (x, a1, s)

    def _dynamics(self, p: ModelParams, s: np.ndarray, enc: np.ndarray):
        u = np.concatenate([s, enc], axis=1)
        h = np.tanh(_linear(u, p["dynamics.l1.weight"], p["dynamics.l1.bias"]))
        s_next = np.tanh(_linear(h, p["dynamics.l2.weight"], p["dynamics.l2.bias"]))
        r = _linear(h, p["dynamics.reward.weight"], p["dynamics.reward.bias"])[:, 0]
        return s_next, r, (u, h, s_next)

    def _predict(self, p: ModelParams, s: np.ndarray):
        t = np.tanh(_linear(s, p["prediction.trunk.weight"], p["prediction.trunk.bias"]))
        policy_logits = _linear(t, p["prediction.policy.weight"], p["prediction.policy.bias"])
        value = _linear(t, p["prediction.value.weight"], p["prediction.value.bias"])[:, 0]
        if self.max_option_length > 1:
            option_logits = _linear(t, p["prediction.option.weight"], p["prediction.option.bias"])
            option_logits = option_logits.reshape(len(s), self.max_option_length - 1, self.action_space_size + 1)
        else:
            option_logits = np.zeros((len(s), 0, self.action_space_size + 1))
        return policy_logits, value, option_logits, (s, t)

    # -- single-state API used by search --------------------------------------------

    def _flatten_observation(self, obs: np.ndarray) -> np.ndarray:
        obs = np.asarray(obs, dtype=np.float64)
        if obs.shape != tuple(self.config.observation_shape):
            raise ModelShapeError(
                "Observation shape mismatch", expected=tuple(self.config.observation_shape), got=obs.shape
            )
        return obs.reshape(1, -1)

    def represent(self, obs: np.ndarray) -> np.ndarray:
        s, _ = self._represent(self.params, self._flatten_observation(obs))
        return s[0]

    def encode_action_sequence(self, action: CompositeAction) -> np.ndarray:
        return encode_action_sequence(action, self.max_option_length, self.action_space_size)

    def dynamics(self, state: np.ndarray, action: CompositeAction) -> DynamicsOutput:
        """Next hidden state and the predicted reward of the whole composite.

        No discount argument: the reward target is already the discounted sum over
        the composite's primitive steps, so the prediction is in those units.
        """
        enc = self.encode_action_sequence(action)
        s_next, r, _ = self._dynamics(self.params, state.reshape(1, -1), enc.reshape(1, -1))
        return DynamicsOutput(next_state=s_next[0], reward=float(r[0]) * self.value_scale)

    def predict(self, state: np.ndarray) -> PredictionOutput:
        policy_logits, value, option_logits, _ = self._predict(self.params, state.reshape(1, -1))
        return PredictionOutput(
            policy=softmax(policy_logits)[0],
            value=float(value[0]) * self.value_scale,
            option_heads=softmax(option_logits)[0],
        )

    # -- training -------------------------------------------------------------------

    def loss_and_gradient(
        self,
        batch: Union[UnrollBatch, Sequence],
        terms: Optional[Collection[str]] = None,
        gradient_scale: Optional[float] = None,
        params: Optional[ModelParams] = None,
    ) -> Tuple[float, np.ndarray, LossBreakdown]:
        """Composite-unroll loss, its gradient over every segment, and the per-term split.

        `terms` restricts which of policy/value/reward/option/l2 contribute;
        `gradient_scale` overrides the dynamics-input gradient scale (1.0 gives the
        exact gradient of the reported loss).
        """
        if not isinstance(batch, UnrollBatch):
            batch = UnrollBatch.from_samples(batch, self.max_option_length, self.action_space_size)
        p = params or self.params
        active = set(LOSS_TERMS if terms is None else terms)
        unknown = active - set(LOSS_TERMS)
        if unknown:
            raise UsageError("Unknown loss terms", terms=sorted(unknown))
        scale = self.config.dynamics_gradient_scale if gradient_scale is None else gradient_scale
        c = self.config.l2_coefficient
        layout = p.layout
        grads = {name: np.zeros(shape) for name, shape in layout.segments}

        b = batch.size
        k_steps = batch.unroll_steps
        x = batch.observations.reshape(b, -1)
        if x.shape[1] != self.config.observation_size:
            raise ModelShapeError("Batch observation size mismatch", expected=self.config.observation_size, got=x.shape[1])
        coef = batch.weights / b

        # forward
        s, rep_cache = self._represent(p, x)
        pred_caches, dyn_caches = [], []
        totals = {"policy": 0.0, "value": 0.0, "reward": 0.0, "option": 0.0}
        d_policy, d_value, d_option, d_reward = [], [], [], []
        for k in range(k_steps + 1):
            if k > 0:
                s, r, cache = self._dynamics(p, s, batch.actions[:, k - 1])
                dyn_caches.append(cache)
                err = r - batch.reward_targets[:, k] / self.value_scale
                totals["reward"] += float(coef @ err**2)
                d_reward.append(coef * 2.0 * err if "reward" in active else np.zeros(b))
            policy_logits, value, option_logits, cache = self._predict(p, s)
            pred_caches.append(cache)

            target = batch.policy_targets[:, k]
            mask = batch.policy_mask[:, k]
            logp = log_softmax(policy_logits)
            totals["policy"] += float((coef * mask) @ -(target * logp).sum(axis=1))
            dp = (coef * mask)[:, None] * (softmax(policy_logits) * target.sum(axis=1, keepdims=True) - target)
            d_policy.append(dp if "policy" in active else np.zeros_like(dp))

            verr = value - batch.value_targets[:, k] / self.value_scale
            totals["value"] += float(coef @ verr**2)
            d_value.append(coef * 2.0 * verr if "value" in active else np.zeros(b))

            if self.max_option_length > 1:
                phi = batch.option_targets[:, k, 1:]
                logo = log_softmax(option_logits)
                totals["option"] += float(coef @ -(phi * logo).sum(axis=(1, 2)))
                do = coef[:, None, None] * (softmax(option_logits) * phi.sum(axis=2, keepdims=True) - phi)
                d_option.append(do if "option" in active else np.zeros_like(do))
            else:
                d_option.append(None)

        l2 = c * p.squared_norm()
        totals["l2"] = l2
        total = sum(v for name, v in totals.items() if name in active)
        if not np.isfinite(total):
            raise TrainingFault("Non-finite loss", version=p.version, **{k: v for k, v in totals.items()})

        # backward
        ds_next = None
        for k in range(k_steps, -1, -1):
            ds = self._predict_backward(p, grads, pred_caches[k], d_policy[k], d_value[k], d_option[k])
            if ds_next is not None:
                ds = ds + ds_next
            if k > 0:
                ds_prev = self._dynamics_backward(p, grads, dyn_caches[k - 1], ds, d_reward[k - 1])
                ds_next = scale * ds_prev
            else:
                self._represent_backward(p, grads, rep_cache, ds)

        gradient = layout.flatten(grads)
        if "l2" in active:
            gradient = gradient + 2.0 * c * p.theta
        breakdown = LossBreakdown(
            total=total,
            policy=totals["policy"] if "policy" in active else 0.0,
            value=totals["value"] if "value" in active else 0.0,
            reward=totals["reward"] if "reward" in active else 0.0,
            option=totals["option"] if "option" in active else 0.0,
            l2=l2 if "l2" in active else 0.0,
        )
        return total, gradient, breakdown

    def _predict_backward(self, p, grads, cache, d_policy, d_value, d_option) -> np.ndarray:
        s, t = cache
        grads["prediction.policy.weight"] += d_policy.T @ t
        grads["prediction.policy.bias"] += d_policy.sum(axis=0)
        dt = d_policy @ p["prediction.policy.weight"]
        grads["prediction.value.weight"] += d_value[None, :] @ t
        grads["prediction.value.bias"] += d_value.sum(keepdims=True)
        dt += d_value[:, None] * p["prediction.value.weight"]
        if d_option is not None:
            flat = d_option.reshape(len(s), -1)
            grads["prediction.option.weight"] += flat.T @ t
            grads["prediction.option.bias"] += flat.sum(axis=0)
            dt += flat @ p["prediction.option.weight"]
        dz = dt * (1.0 - t**2)
        grads["prediction.trunk.weight"] += dz.T @ s
        grads["prediction.trunk.bias"] += dz.sum(axis=0)
        return dz @ p["prediction.trunk.weight"]

    def _dynamics_backward(self, p, grads, cache, ds_next, d_reward) -> np.ndarray:
        u, h, s_next = cache
        dz2 = ds_next * (1.0 - s_next**2)
        grads["dynamics.l2.weight"] += dz2.T @ h
        grads["dynamics.l2.bias"] += dz2.sum(axis=0)
        dh = dz2 @ p["dynamics.l2.weight"]
        grads["dynamics.reward.weight"] += d_reward[None, :] @ h
        grads["dynamics.reward.bias"] += d_reward.sum(keepdims=True)
        dh += d_reward[:, None] * p["dynamics.reward.weight"]
        dz1 = dh * (1.0 - h**2)
        grads["dynamics.l1.weight"] += dz1.T @ u
        grads["dynamics.l1.bias"] += dz1.sum(axis=0)
        du = dz1 @ p["dynamics.l1.weight"]
        return du[:, : self.config.hidden_size]

    def _represent_backward(self, p, grads, cache, ds) -> None:
        x, a1, s = cache
        dz2 = ds * (1.0 - s**2)
        grads["representation.l2.weight"] += dz2.T @ a1
        grads["representation.l2.bias"] += dz2.sum(axis=0)
        da1 = dz2 @ p["representation.l2.weight"]
        dz1 = da1 * (1.0 - a1**2)
        grads["representation.l1.weight"] += dz1.T @ x
        grads["representation.l1.bias"] += dz1.sum(axis=0)
