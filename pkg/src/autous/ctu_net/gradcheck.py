"""Finite-difference verification of the model's parameter gradients.

Runs entirely in float64 with the model in eval mode (fixed BN statistics, no
dropout) so central differences are meaningful.  The check samples parameter
coordinates across all named tensors, compares autograd against
``(f(p+eps) - f(p-eps)) / (2 eps)`` and reports the worst relative error with
denominator ``max(|analytic|, |fd|, 1e-8)``.

Step-size policy: a single step cannot serve every coordinate.  The difference
of two float64 loss values carries rounding noise of order machine epsilon, so
the quotient carries noise of order ``eps_mach / step``; with the base step
that noise dwarfs gradients that are honestly near zero, while a large step
risks spanning a ReLU or max-pool kink where a symmetric difference no longer
approximates the one-sided derivative autograd reports.  The harness therefore
uses the base step whenever either the analytic or base finite-difference
value is appreciable, and for near-zero coordinates re-measures with a larger
noise-suppressing step.  The larger step is accepted only when measurements at
two different large steps agree to well below the reporting floor, which can
only happen where the loss is locally smooth in that coordinate; coordinates
that fail the probe sit against a kink, where central differencing is invalid
for any step, and are resampled (the count is reported).  The probe never
consults the analytic gradient, so a wrong gradient can never be skipped: at a
smooth coordinate both probe measurements agree on the true local slope and
the comparison proceeds against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from ..exceptions import ValidationError
from .config import ModelConfig
from .model import build_model

# Coordinates whose analytic and base-step values both fall below this are
# noise-bound at the base step and get the refinement treatment.
SMALL_GRADIENT = 1e-6
# Two large-step measurements must agree this closely to count as smooth.
# Their combined rounding noise is a couple of 1e-12, so this is a 20x
# safety factor while still vetoing kink contamination near the 1e-8 floor.
SMOOTHNESS_GUARD = 1e-10
# The refined value must also agree with the base measurement to within the
# base step's noise envelope.  A kink lying between the two scales saturates
# the large-step quotients to a mixed slope that the large-step pair cannot
# distinguish, but it pulls the refined value away from the base one by more
# than rounding noise ever does.
BASE_CONSISTENCY_GUARD = 5e-11


@dataclass
class GradCheckResult:
    max_relative_error: float
    worst_parameter: str
    num_coordinates: int
    per_parameter_worst: dict[str, float] = field(default_factory=dict)
    num_skipped: int = 0


def gradient_check(
    config: ModelConfig,
    loss_fn=None,
    inputs: torch.Tensor | None = None,
    epsilon: float = 1e-5,
    refine_epsilon: float = 4e-4,
    num_coordinates: int = 200,
    batch_size: int = 2,
    seed: int = 0,
) -> GradCheckResult:
    if not 1e-6 <= epsilon <= 1e-3:
        raise ValidationError(f"epsilon must be in [1e-6, 1e-3], got {epsilon}")
    if not 1e-6 <= refine_epsilon <= 5e-4:
        raise ValidationError(
            f"refine_epsilon must be in [1e-6, 5e-4], got {refine_epsilon}"
        )
    if num_coordinates < 1:
        raise ValidationError("num_coordinates must be >= 1")

    model = build_model(config).double().eval()
    rng = np.random.default_rng(seed)

    if inputs is None:
        shape = (batch_size, *config.input_shape)
        inputs = torch.from_numpy(rng.random(shape))
    inputs = inputs.double()

    if loss_fn is None:
        labels = torch.from_numpy(
            rng.integers(0, config.num_classes, size=inputs.shape[0])
        )

        def loss_fn(pred):
            return F.cross_entropy(pred.logits, labels)

    for name, p in model.named_parameters():
        if not torch.isfinite(p).all():
            raise ValidationError(f"parameter {name} is non-finite before check")

    loss = loss_fn(model(inputs))
    model.zero_grad()
    loss.backward()

    params = list(model.named_parameters())
    analytic = {}
    for name, p in params:
        grad = p.grad
        if grad is not None and not torch.isfinite(grad).all():
            raise ValidationError(f"non-finite analytic gradient for {name}")
        analytic[name] = grad

    # Spread candidate coordinates across parameters proportionally to size.
    # The pool is larger than requested so kink-adjacent coordinates can be
    # replaced while still testing the full quota.
    sizes = np.array([p.numel() for _, p in params])
    pool = 4 * num_coordinates
    picks = rng.choice(len(params), size=pool, p=sizes / sizes.sum())
    coords = [(int(i), int(rng.integers(0, params[i][1].numel()))) for i in picks]

    worst = 0.0
    worst_name = ""
    per_param: dict[str, float] = {}
    accepted = 0
    skipped = 0
    with torch.no_grad():
        for param_idx, coord in coords:
            if accepted >= num_coordinates:
                break
            name, p = params[param_idx]
            flat = p.data.view(-1)
            original = flat[coord].item()

            def central(step: float) -> float:
                flat[coord] = original + step
                loss_plus = loss_fn(model(inputs)).item()
                flat[coord] = original - step
                loss_minus = loss_fn(model(inputs)).item()
                flat[coord] = original
                return (loss_plus - loss_minus) / (2.0 * step)

            grad = analytic[name]
            a = grad.view(-1)[coord].item() if grad is not None else 0.0
            fd = central(epsilon)
            if abs(a) < SMALL_GRADIENT and abs(fd) < SMALL_GRADIENT:
                fd_big = central(refine_epsilon)
                fd_probe = central(2.0 * refine_epsilon)
                if (
                    abs(fd_big - fd_probe) > SMOOTHNESS_GUARD
                    or abs(fd_big - fd) > BASE_CONSISTENCY_GUARD
                ):
                    skipped += 1
                    continue
                fd = fd_big

            rel = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
            per_param[name] = max(per_param.get(name, 0.0), rel)
            if rel > worst:
                worst, worst_name = rel, name
            accepted += 1

    if accepted < num_coordinates:
        raise ValidationError(
            f"only {accepted} of {num_coordinates} coordinates were smooth "
            "enough to difference; choose a different input or seed"
        )

    return GradCheckResult(
        max_relative_error=worst,
        worst_parameter=worst_name,
        num_coordinates=accepted,
        per_parameter_worst=per_param,
        num_skipped=skipped,
    )
