"""Python access to the clrlab numerical core."""

from ._core import (
    ClusteredDataset,
    __version__,
    cluster_coherence,
    generalized_loss,
    generate_dataset,
    init_gaussian_weights,
    invariant_gradient,
    kernel,
    kernel_infinite,
    nt_xent_latent,
    one_hidden_forward,
    run_experiment,
    second_variation,
    stationarity_check,
    step_kernel,
    step_vanilla,
    uniformity_score,
    vicreg_latent,
)

__all__ = [
    "ClusteredDataset",
    "__version__",
    "cluster_coherence",
    "generalized_loss",
    "generate_dataset",
    "init_gaussian_weights",
    "invariant_gradient",
    "kernel",
    "kernel_infinite",
    "nt_xent_latent",
    "one_hidden_forward",
    "run_experiment",
    "second_variation",
    "stationarity_check",
    "step_kernel",
    "step_vanilla",
    "uniformity_score",
    "vicreg_latent",
]
