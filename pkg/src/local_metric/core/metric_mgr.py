"""
Copyright 2025 local-metric contributors

Operations on symmetric positive semi-definite metric matrices: lengths, norms and the
projection that keeps every learned metric inside the PSD cone.
"""
import numpy as np
from local_metric.core.utils.app_config import logger
from local_metric.core.utils.errors import ConfigurationError
from local_metric.core.models.metric_model import ModelParams

NEGATIVE_FORM_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-9
SYMMETRY_TOLERANCE = 1e-12

# ----------- Public APIs  ------------------------------------------------------------

def mahalanobis_length(x_i: np.ndarray, x_j: np.ndarray, metric: np.ndarray) -> float:
    """
    Non squared Mahalanobis length sqrt((x_i - x_j)^T M (x_i - x_j)).
    A slightly negative quadratic form (rounding noise around 0) is clamped to 0.
    """
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    metric = np.asarray(metric, dtype=float)
    if x_i.shape != x_j.shape or metric.shape != (x_i.shape[0], x_i.shape[0]):
        logger.error(f"dimension mismatch: {x_i.shape}, {x_j.shape}, metric {metric.shape}")
        raise ConfigurationError(f"dimension mismatch: points {x_i.shape} and {x_j.shape}, metric {metric.shape}")
    v = x_i - x_j
    q = float(v @ metric @ v)
    if q < 0:
        if q <= -NEGATIVE_FORM_TOLERANCE:
            raise ConfigurationError(f"negative quadratic form {q}: the metric is not positive semi-definite")
        q = 0.0
    return float(np.sqrt(q))


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    return (matrix + matrix.T) / 2.0


def project_psd(matrix: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """
    Frobenius-nearest matrix with eigenvalues >= floor: symmetrize, eigendecompose,
    clip the spectrum and rebuild. Already projected inputs come back unchanged.
    """
    sym = symmetrize(matrix)
    eigenvalues, eigenvectors = np.linalg.eigh(sym)
    if eigenvalues[0] >= floor:
        return sym
    clipped = np.maximum(eigenvalues, floor)
    projected = (eigenvectors * clipped) @ eigenvectors.T
    return symmetrize(projected)


def frobenius_norm(matrix: np.ndarray) -> float:
    return float(np.linalg.norm(matrix, ord="fro"))


def spectral_sqrt_norm(matrix: np.ndarray) -> float:
    """sqrt of the largest eigenvalue of a PSD metric, the Lipschitz constant of its length."""
    largest = float(np.linalg.eigvalsh(symmetrize(matrix))[-1])
    return float(np.sqrt(max(largest, 0.0)))


def is_psd(matrix: np.ndarray, tolerance: float = PSD_TOLERANCE) -> bool:
    matrix = np.asarray(matrix, dtype=float)
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=SYMMETRY_TOLERANCE):
        return False
    return bool(np.linalg.eigvalsh(matrix)[0] >= -tolerance)


def check_model_invariants(model: ModelParams, radius_floor: float) -> list[str]:
    """
    Returns the list of violated invariants (empty when the model is valid):
    every metric symmetric PSD and every radius >= radius_floor.
    """
    violations = []
    if not is_psd(model.background_metric):
        violations.append("background metric is not symmetric PSD")
    for s, region in enumerate(model.regions):
        if not is_psd(region.metric):
            violations.append(f"metric of region {s} is not symmetric PSD")
        if region.ball.radius < radius_floor:
            violations.append(f"radius of region {s} is {region.ball.radius} < {radius_floor}")
    return violations
