"""Stacked training arrays for one optimizer step."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoding import encode_action_sequence


@dataclass(frozen=True)
class UnrollBatch:
    observations: np.ndarray  # (B, C, H, W)
    actions: np.ndarray  # (B, K, L*|A|) action-sequence encodings
    policy_targets: np.ndarray  # (B, K+1, |A|)
    value_targets: np.ndarray  # (B, K+1)
    reward_targets: np.ndarray  # (B, K+1); column 0 unused
    option_targets: np.ndarray  # (B, K+1, L, |A|+1) one-hot; slot 0 unused
    policy_mask: np.ndarray  # (B, K+1)
    weights: np.ndarray  # (B,)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def unroll_steps(self) -> int:
        return self.actions.shape[1]

    @classmethod
    def from_samples(cls, samples: Sequence, max_option_length: int, action_space_size: int) -> "UnrollBatch":
        """Stack unroll samples (objects exposing the training-target attributes)."""
        stop = action_space_size
        observations, actions, policies, values, rewards, options, masks, weights = ([] for _ in range(8))
        for sample in samples:
            observations.append(np.asarray(sample.observation, dtype=np.float64))
            actions.append(
                [encode_action_sequence(a, max_option_length, action_space_size) for a in sample.actions]
            )
            policies.append(np.asarray(sample.policy_targets, dtype=np.float64))
            values.append(np.asarray(sample.value_targets, dtype=np.float64))
            rewards.append(np.asarray(sample.reward_targets, dtype=np.float64))
            onehot = np.zeros((len(sample.option_targets), max_option_length, stop + 1))
            for k, phi in enumerate(sample.option_targets):
                for slot, entry in enumerate(phi):
                    onehot[k, slot, stop if entry is None else entry] = 1.0
            options.append(onehot)
            masks.append(np.asarray(sample.policy_mask, dtype=np.float64))
            weights.append(float(sample.weight))
        return cls(
            observations=np.stack(observations),
            actions=np.asarray(actions, dtype=np.float64),
            policy_targets=np.stack(policies),
            value_targets=np.stack(values),
            reward_targets=np.stack(rewards),
            option_targets=np.stack(options),
            policy_mask=np.stack(masks),
            weights=np.asarray(weights, dtype=np.float64),
        )
