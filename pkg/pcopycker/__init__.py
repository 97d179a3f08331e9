"""
This is pcopycker, kernel density bandwidth selection by penalized comparison to overfitting

The selection itself lives in :mod:`pcopycker.pco`, the penalty calibration in :mod:`pcopycker.calibration`, the
reference selectors in :mod:`pcopycker.baselines` and the Monte Carlo experiments in :mod:`pcopycker.risklab` and
:mod:`pcopycker.gwn`.
"""

__author__ = "PcoPycker developers"
__version__ = "0.1.0"
