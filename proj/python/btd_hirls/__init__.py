"""Rank-(Lr,Lr,1) block-term decomposition with joint estimation of R and the Lr.

Tensors are float64 numpy arrays of shape (I, J, K). Factors are returned as
a dict with lists ``A`` and ``B`` of per-block matrices and the matrix ``C``.
"""

from ._core import (
    SolverError,
    add_noise_snr,
    band_ssim_curve,
    count_effective_ranks,
    fold,
    gen_btd,
    khatri_rao_columnwise,
    kronecker,
    lambda_heuristic,
    linear_assignment,
    nmse_blocks,
    objective,
    read_tensor,
    reconstruct,
    regularizer_value,
    run_als,
    run_hirls,
    ssim,
    unfold,
    write_t3,
)

__all__ = [
    "SolverError",
    "add_noise_snr",
    "band_ssim_curve",
    "count_effective_ranks",
    "fold",
    "gen_btd",
    "khatri_rao_columnwise",
    "kronecker",
    "lambda_heuristic",
    "linear_assignment",
    "nmse_blocks",
    "objective",
    "read_tensor",
    "reconstruct",
    "regularizer_value",
    "run_als",
    "run_hirls",
    "ssim",
    "unfold",
    "write_t3",
]
