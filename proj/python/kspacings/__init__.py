"""Python bindings for the k-spacings toolkit."""

from ._kspacings import (  # noqa: F401
    ConfigError,
    DomainError,
    IoError,
    NumericError,
    PreconditionError,
    ResourceError,
    bandwidth,
    brute_force_modulus,
    check_conditions,
    erdos_renyi_beta,
    gamma_cdf,
    gamma_log_survival,
    gamma_pdf,
    gamma_quantile,
    gamma_survival,
    h_function,
    lil_normalizer,
    oscillation_modulus,
    phi_increment_sup,
    psi_increment_sup,
    run_experiment,
    sample_spacings,
    tail_threshold_log,
)

__version__ = "0.1.0"
