"""Inertial and relaxed nonlinear forward-backward splitting."""

from ._nfbm import (  # noqa: F401
    NfbmError,
    builtin_pattern,
    certify,
    gamma_for_kappa,
    operator_norms,
    psnr,
    run_experiment,
    table_params,
    __version__,
)
