"""
Data-driven choice of the penalty constant λ

Below the minimal penalty the criterion keeps selecting bandwidths close to h_min; above it the selection jumps to
bandwidths of the order of the oracle. The jump is located on a λ scan and the recommended constant is one λ-unit
above it, the distance between the minimal and the optimal penalty shapes.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from pcopycker.exceptions import CalibrationFailed, InvalidArgument
from pcopycker.kde import Sample
from pcopycker.pco import BandwidthGrid, ComparisonProfile, PenaltyMode, PenaltySpec


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

#: smallest ratio of consecutive selected volumes counted as a jump
JUMP_THRESHOLD = 5.0
#: λ values of a scan when none are given
DEFAULT_LAMBDAS = tuple(np.linspace(-1.0, 2.0, 31).tolist())
#: the scanned λ values must cover this interval
REQUIRED_SPAN = (-1.0, 2.0)
MIN_LAMBDAS = 5


@dataclass
class CalibrationTrace:
    """
    Selected bandwidth as a function of λ

    :param lambdas: strictly increasing λ values
    :param selections: selected bandwidth per λ
    :param critical: detected critical λ, None when no jump was found
    :param jump_ratio: largest ratio of consecutive selected volumes
    """
    lambdas: tuple
    selections: tuple
    critical: float = None
    jump_ratio: float = None

    @property
    def volumes(self) -> np.ndarray:
        return np.array([h.volume for h in self.selections])

    @property
    def recommended(self) -> float:
        """ λ̂_crit + 1, None without a transition """
        return None if self.critical is None else self.critical + 1.0

    def to_frame(self) -> pd.DataFrame:
        """ one row per λ: lambda, h1..hd, volume """
        dimension = self.selections[0].dimension if self.selections else 1
        frame = pd.DataFrame({"lambda": list(self.lambdas)})
        for axis in range(dimension):
            frame["h{}".format(axis + 1)] = [h.components[axis] for h in self.selections]
        frame["volume"] = self.volumes
        return frame

    def summary(self) -> dict:
        return {
            "critical_lambda": self.critical,
            "recommended_lambda": self.recommended,
            "jump_ratio": self.jump_ratio,
            "lambdas": list(self.lambdas),
        }


def _check_lambdas(lambdas) -> tuple:
    lambdas = tuple(float(value) for value in lambdas)
    if not lambdas:
        raise InvalidArgument("A λ scan needs at least one value")
    if len(lambdas) < MIN_LAMBDAS:
        raise InvalidArgument("A λ scan needs at least {} values, got {}".format(MIN_LAMBDAS, len(lambdas)))
    if any(not np.isfinite(value) for value in lambdas):
        raise InvalidArgument("λ values must be finite")
    if any(second <= first for first, second in zip(lambdas[:-1], lambdas[1:])):
        raise InvalidArgument("λ values must be strictly increasing")
    if lambdas[0] > REQUIRED_SPAN[0] or lambdas[-1] < REQUIRED_SPAN[1]:
        raise InvalidArgument("λ values must cover [{}, {}], got [{}, {}]".format(
            REQUIRED_SPAN[0], REQUIRED_SPAN[1], lambdas[0], lambdas[-1]))
    return lambdas


def scan_lambda(sample: Sample, K, grid: BandwidthGrid, lambdas=DEFAULT_LAMBDAS, runner=None,
                profile: ComparisonProfile = None, threshold: float = JUMP_THRESHOLD) -> CalibrationTrace:
    """
    Runs the selection for every λ and records the selected bandwidths

    The comparison terms do not depend on λ and are computed once.

    :param sample: the observations
    :param K: Kernel or ProductKernel
    :param grid: candidate bandwidths
    :param lambdas: strictly increasing λ values covering [-1, 2]
    :param runner: optional parallel runner
    :param profile: comparison profile to reuse
    :param threshold: jump threshold passed to :func:`detect_jump`
    :return: the trace, with the detected critical λ filled in
    """
    lambdas = _check_lambdas(lambdas)
    if profile is None:
        profile = ComparisonProfile(sample, K, grid, runner=runner)
    selections = tuple(profile.table(PenaltySpec(value, PenaltyMode.family)).selected for value in lambdas)
    trace = CalibrationTrace(lambdas, selections)
    trace.critical = detect_jump(trace, threshold)
    return trace


def detect_jump(trace: CalibrationTrace, threshold: float = JUMP_THRESHOLD):
    """
    λ between the consecutive scan points with the largest ratio of selected volumes

    :param trace: a populated trace
    :param threshold: the ratio must reach this value to count as a jump
    :return: the midpoint of the two λ values, or None when no ratio reaches the threshold
    """
    volumes = trace.volumes
    if len(volumes) < 2:
        trace.jump_ratio = None
        return None
    ratios = volumes[1:] / volumes[:-1]
    position = int(np.argmax(ratios))
    trace.jump_ratio = float(ratios[position])
    if ratios[position] < threshold:
        logger.info("no transition on the λ scan, largest volume ratio %g", ratios[position])
        return None
    critical = 0.5 * (trace.lambdas[position] + trace.lambdas[position + 1])
    logger.info("critical λ %g, volume ratio %g", critical, ratios[position])
    return critical


def recommend(trace: CalibrationTrace) -> PenaltySpec:
    """
    pen_λ with λ = λ̂_crit + 1

    :raise CalibrationFailed: if the trace has no transition
    """
    if trace.critical is None:
        trace.critical = detect_jump(trace)
    if trace.critical is None:
        raise CalibrationFailed("No jump of the selected volume on the λ scan", trace)
    return PenaltySpec(trace.critical + 1.0, PenaltyMode.family)


def calibrated_spec(profile: ComparisonProfile, lambdas=DEFAULT_LAMBDAS):
    """
    Fully data-driven penalty: calibrated when a jump exists, λ = 1 otherwise

    :param profile: comparison profile of the sample and grid
    :param lambdas: λ scan
    :return: tuple (spec, trace, calibrated)
    """
    trace = scan_lambda(profile.sample, profile.kernel, profile.grid, lambdas, profile=profile)
    try:
        return recommend(trace), trace, True
    except CalibrationFailed:
        return PenaltySpec(1.0, PenaltyMode.family), trace, False
