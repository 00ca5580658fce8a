"""Facility energy management toolkit.

Subpackages cover the full pipeline: file ingestion into a per-facility
store, invoice-anchored meter imputation, daily feature assembly, ensemble
tree regressors with monthly backtested model selection, occupancy-then-
demand forecasting, green-power procurement what-if analysis, and exact
integer carbon-offset planning. An HTTP service and a CLI expose the same
operations.
"""

__version__ = "0.1.0"
