#!/usr/bin/python3

"""
PcoPycker's main program

Every subcommand prints its JSON result on stdout and writes it, with its CSV tables, under the output directory.
Errors are reported as a JSON object on stdout and mapped to an exit status.
"""


import argparse
import datetime
import enum
import logging
import sys

from pcopycker import __version__, calibration, dataio, gwn, risklab
from pcopycker.baselines import BaselineMethod, BaselineSpec, baseline_select, gl_table
from pcopycker.config import GWN_LAMBDAS, SUBCOMMANDS, RunConfig, load_config, parse_grid, parse_kernel
from pcopycker.densities import density_from_id
from pcopycker.exceptions import CalibrationFailed, ConfigurationError, DataFormatError, InvalidArgument, \
    PcoPyckerError, UnsupportedOperation
from pcopycker.pco import ComparisonProfile, PairwiseSums, PenaltySpec
from pcopycker.runner import ParallelRunner


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)


class ExitStatus(enum.IntEnum):
    """
    Exit statuses of the program
    """
    success = 0
    internal_error = 1
    invalid_configuration = 2
    data_error = 3
    calibration_failed = 4


class ArgumentParser(argparse.ArgumentParser):
    """ argument parser reporting errors as configuration errors instead of exiting """
    def error(self, message):
        raise ConfigurationError(message)


def _flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-v", "--verbose", dest="verbosity", action="count", default=0,
                        help="more logging on stderr, repeat for debug messages")
    parser.add_argument("-q", "--quiet", dest="quiet", action="store_true", help="only log errors")
    parser.add_argument("--config", help="JSON file whose keys override the flags")
    parser.add_argument("--out", help="output directory (default: current directory)")
    parser.add_argument("--threads", type=int, help="worker processes (default: 1)")
    parser.add_argument("--seed", type=int, help="master seed, mandatory for simulate and gwn-demo")
    parser.add_argument("--kernel", help="gaussian, epanechnikov or order:<l>:<base>")
    parser.add_argument("--grid", help="auto, inverse[:<kmax>] or geometric:<hmin>:<hmax>:<count>[;...]")
    parser.add_argument("--lambda", dest="lambda_", type=float, help="penalty constant λ (default: 1)")
    parser.add_argument("--lambda-grid", dest="lambdas", help="λ values, a,b,c or <start>:<stop>:<count>")
    parser.add_argument("--kappa", dest="kappa1", type=float, help="constant of the baselines (default: 1.2)")
    parser.add_argument("--reps", type=int, help="Monte Carlo replications")


class PcoProgram:
    """
    A command-line program selecting bandwidths and running the experiments

    :param argv: arguments, sys.argv[1:] by default
    :param exit: whether to exit with the status once done
    :param stdout: stream receiving the JSON results
    """
    def __init__(self, argv=None, exit=True, stdout=None):
        self.stdout = stdout if stdout is not None else sys.stdout
        self.config = None
        self.runner = None
        self.timestamp = datetime.datetime.now().strftime(dataio.TIMESTAMP_FORMAT)
        self.status = self.run(sys.argv[1:] if argv is None else list(argv))
        if exit:
            sys.exit(int(self.status))

    @staticmethod
    def create_parser() -> argparse.ArgumentParser:
        parser = ArgumentParser(description="Kernel density bandwidth selection by penalized "
                                            "comparison to overfitting")
        parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
        commands = parser.add_subparsers(dest="subcommand", metavar="{" + ",".join(SUBCOMMANDS) + "}")
        commands.required = True

        select = commands.add_parser("select", help="select a bandwidth for a sample")
        select.add_argument("input", help="CSV file, one observation per row")
        select.add_argument("--method", choices=[method.value for method in BaselineMethod] + ["pco"])
        _flags(select)

        calibrate = commands.add_parser("calibrate", help="locate the minimal penalty and recommend λ")
        calibrate.add_argument("input", help="CSV file, one observation per row")
        _flags(calibrate)

        simulate = commands.add_parser("simulate", help="run a Monte Carlo experiment")
        simulate.add_argument("--experiment", help="oracle, minimal_penalty, rate or calibration")
        simulate.add_argument("--density", help="standard_normal, uniform, bimodal, claw, ...")
        simulate.add_argument("--dimension", type=int, help="dimension of standard_normal and uniform targets")
        simulate.add_argument("--n", type=int, help="sample size")
        simulate.add_argument("--n-list", dest="n_list", help="sample sizes of the rate experiment, a,b,c")
        simulate.add_argument("--methods", help="comma-separated methods: pco:<λ>, pco:calibrated, lepski, gl, lscv")
        simulate.add_argument("--order", type=int, help="kernel order of the rate experiment")
        _flags(simulate)

        demo = commands.add_parser("gwn-demo", help="ordered selection in the gaussian sequence model")
        demo.add_argument("--N", dest="N", type=int, help="number of coefficients (default: 500)")
        demo.add_argument("--n", type=int, help="sample size, ε² = 1/n (default: N)")
        demo.add_argument("--theta", help="zero or power:<a>")
        _flags(demo)
        return parser

    def parse_args(self, argv) -> RunConfig:
        """
        Builds the configuration: defaults, then flags, then the --config file
        """
        arguments = vars(self.create_parser().parse_args(argv))
        config_file = arguments.pop("config", None)
        if arguments.pop("quiet", False):
            arguments["verbosity"] = -1
        values = {key: value for key, value in arguments.items() if value is not None and key != "subcommand"}
        config = RunConfig(arguments["subcommand"]).override(values)
        if config_file is not None:
            overrides = load_config(config_file)
            overrides.pop("subcommand", None)
            config = config.override(overrides)
        return config.validate()

    @staticmethod
    def configure_logging(verbosity: int) -> None:
        level = {-1: logging.ERROR, 0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
        logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    def run(self, argv) -> ExitStatus:
        """
        Parses the arguments and runs the subcommand

        :return: the exit status
        """
        try:
            self.config = self.parse_args(argv)
            self.configure_logging(self.config.verbosity)
            if self.config.threads > 1:
                self.runner = ParallelRunner(self.config.threads)
            command = getattr(self, self.config.subcommand.replace("-", "_"))
            self.emit(command())
            return ExitStatus.success
        except CalibrationFailed as exc:
            return self.fail(exc, ExitStatus.calibration_failed)
        except (DataFormatError, OSError) as exc:
            return self.fail(exc, ExitStatus.data_error)
        except (InvalidArgument, UnsupportedOperation) as exc:
            return self.fail(exc, ExitStatus.invalid_configuration)
        except PcoPyckerError as exc:
            return self.fail(exc, ExitStatus.internal_error)
        except Exception as exc:
            logger.exception("internal error")
            return self.fail(exc, ExitStatus.internal_error)

    def fail(self, exc: Exception, status: ExitStatus) -> ExitStatus:
        self.emit({"error": type(exc).__name__, "message": str(exc), "status": int(status)})
        return status

    def emit(self, payload: dict) -> None:
        self.stdout.write(dataio.dumps(payload))
        self.stdout.write("\n")

    def path(self, extension: str) -> str:
        return dataio.output_path(self.config.out, self.config.subcommand, extension, self.timestamp)

    def save(self, result: dict, frame=None) -> dict:
        """
        Writes the JSON result and the optional CSV table, then adds their paths to the printed result
        """
        paths = {"output": dataio.write_json(self.path("json"), result)}
        if frame is not None:
            paths["table"] = dataio.write_csv(self.path("csv"), frame)
        result.update(paths)
        return result

    def select(self) -> dict:
        config = self.config
        sample = dataio.ingest_csv(config.input)
        kernel = parse_kernel(config.kernel)
        grid = parse_grid(config.grid, kernel, sample.n, sample.dimension)
        result = {
            "command": "select",
            "method": config.method,
            "kernel": kernel.identifier,
            "n": sample.n,
            "dimension": sample.dimension,
            "grid": {"size": len(grid), "hmin": list(grid.hmin.components), "hmax": list(grid.hmax.components)},
        }
        if config.method == "pco":
            profile = ComparisonProfile(sample, kernel, grid, runner=self.runner)
            table = profile.table(PenaltySpec(config.lambda_))
            result.update({"lambda": config.lambda_, "selected": list(table.selected.components),
                           "table": table.rows(), "warnings": table.warnings})
        else:
            spec = BaselineSpec(BaselineMethod(config.method), kappa1=config.kappa1)
            sums = PairwiseSums(sample, kernel)
            selected = baseline_select(spec, sample, kernel, grid, sums)
            result.update({"kappa1": spec.kappa1, "kappa2": spec.kappa2, "selected": list(selected.components),
                           "warnings": list(grid.warnings)})
            if spec.method is BaselineMethod.gl:
                table = gl_table(sample, kernel, grid, spec, sums)
                result["table"] = [{"bandwidth": list(h.components), "bias_proxy": a, "variance_proxy": v,
                                    "criterion": t}
                                   for h, a, v, t in zip(table.bandwidths, table.bias_proxy, table.variance_proxy,
                                                         table.total)]
        return self.save(result)

    def calibrate(self) -> dict:
        config = self.config
        sample = dataio.ingest_csv(config.input)
        kernel = parse_kernel(config.kernel)
        grid = parse_grid(config.grid, kernel, sample.n, sample.dimension)
        lambdas = config.lambdas if config.lambdas is not None else calibration.DEFAULT_LAMBDAS
        trace = calibration.scan_lambda(sample, kernel, grid, lambdas, runner=self.runner)
        result = dict(trace.summary(), command="calibrate", kernel=kernel.identifier, n=sample.n)
        self.save(result, trace.to_frame())
        calibration.recommend(trace)
        return result

    def simulate(self) -> dict:
        config = self.config
        density = density_from_id(config.density, config.dimension)
        kernel = parse_kernel(config.kernel)
        result = {"command": "simulate", "experiment": config.experiment, "density": density.identifier,
                  "kernel": kernel.identifier, "seed": config.seed, "reps": config.reps}

        if config.experiment == "rate":
            n_list = config.n_list or (250, 500, 1000, 2000, 4000)
            report = risklab.rate_experiment(density, config.order, n_list, config.reps, config.seed,
                                             base=config.kernel, lambda_=config.lambda_, runner=self.runner)
            frame = report.to_frame()
            result.update({"order": config.order, "slope": report.slope, "intercept": report.intercept})
        else:
            if config.n is None:
                raise ConfigurationError("The {} experiment needs a sample size n".format(config.experiment))
            grid = parse_grid(config.grid, kernel, config.n, density.dimension)
            result.update({"n": config.n, "grid": {"size": len(grid), "hmin": list(grid.hmin.components),
                                                   "hmax": list(grid.hmax.components)}})
            if config.experiment == "oracle":
                report = risklab.oracle_experiment(density, config.n, grid, config.methods, config.reps, config.seed,
                                                   kernel, runner=self.runner,
                                                   lambdas=config.lambdas or calibration.DEFAULT_LAMBDAS,
                                                   kappa1=config.kappa1)
                frame = report.long_frame()
                result.update(report.summary())
                result["bandwidths"] = report.bandwidth_frame().to_dict(orient="records")
            elif config.experiment == "minimal_penalty":
                frame = risklab.minimal_penalty_experiment(density, config.n, grid, config.lambdas or (-0.5, -2.0),
                                                           config.reps, config.seed, kernel, runner=self.runner)
                result["frequencies"] = frame.to_dict(orient="records")
            else:
                frame = risklab.calibration_experiment(density, config.n, grid, config.reps, config.seed, kernel,
                                                       lambdas=config.lambdas or calibration.DEFAULT_LAMBDAS,
                                                       runner=self.runner)
                result["frequency_in_interval"] = float(frame["in_interval"].mean())

        return self.save(result, frame)

    def gwn_demo(self) -> dict:
        config = self.config
        model = gwn.SequenceModel.from_profile(config.theta, config.N, config.n if config.n is not None else config.N)
        lambdas = config.lambdas if config.lambdas is not None else GWN_LAMBDAS
        frame = gwn.phase_diagram(model, lambdas, config.reps, config.seed, runner=self.runner)
        result = {"command": "gwn-demo", "N": model.N, "epsilon": model.epsilon, "theta": config.theta,
                  "seed": config.seed, "reps": config.reps, "phase_diagram": frame.to_dict(orient="records")}
        return self.save(result, frame)


main = PcoProgram
