"""Metric, Christoffel symbols, covariant operators and geodesics on 2D charts."""
from .charts import (BUILTIN_CHARTS, MONGE_CATALOG, chart_from_name, cylinder, flat,
                     monge, sphere, torus)
from .geodesic import geodesic_step, integrate_geodesic
from .grid import (ChartGrid, covariant_div_tensor2, covariant_div_vector,
                   covariant_grad_vector)
from .metric import (DET_G_MIN, MetricData, SurfaceChart, christoffel_from,
                     cholesky_frame, metric_at, metric_fields)

__all__ = [
    "BUILTIN_CHARTS", "MONGE_CATALOG", "ChartGrid", "DET_G_MIN", "MetricData",
    "SurfaceChart", "chart_from_name", "cholesky_frame", "christoffel_from",
    "covariant_div_tensor2", "covariant_div_vector", "covariant_grad_vector",
    "cylinder", "flat", "geodesic_step", "integrate_geodesic", "metric_at",
    "metric_fields", "monge", "sphere", "torus",
]
