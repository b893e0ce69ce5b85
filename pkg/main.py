import argparse
import json
import logging
import sys
import time
from dataclasses import replace

import numpy as np

from chain_geometry import (DEFAULT_C1, Disc, DiscChain, ChainReport, mesh_size, neighborhood_separation_check,
                            pacman_condition, quasicircle_constant, spacing_constant, turning_angle_check,
                            validate_disc_chain)
from complex_core import INF, Polyline, spherical_distance
from config import Config, colors, setup_logging
from errors import (AmbiguousBranchError, DegenerateInputError, FileFormatError, NewtonConvergenceError,
                    PreconditionError, ZipmapError)
from file_formats import (load_pipeline, read_points, save_pipeline, write_boundary, write_grid_csv,
                          write_grid_svg, write_points)
from map_builder import (VARIANTS, BranchPolicy, WeldingSpec, boundary_sample, build, data_image_residual,
                         eval_forward, eval_forward_many, eval_inverse_many, grid_curves, normalize_to_disc,
                         prevertex_angle_error, weld_build)

logger = logging.getLogger("zipmap")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_USAGE = 3

SELFTEST_TABLE = (500, 1000, 2000, 4000)
CHECKS = ("disc-chain", "pacman", "turning", "spacing", "quasicircle", "separation", "mesh")


class UsageError(Exception):
    pass


class ZipmapArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here 2 is reserved for numerical failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def complex_arg(text: str) -> complex:
    """'re,im' on the command line."""
    try:
        re_part, im_part = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")
    return complex(re_part, im_part)


def float_list(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def read_discs(path: str):
    """Rows 're,im,radius' (same comment rules as point files)."""
    discs = []
    try:
        with open(path, 'r', encoding='utf-8') as f:
            for line, text in enumerate(f, start=1):
                text = text.strip()
                if not text or text.startswith('#'):
                    continue
                fields = [v.strip() for v in text.split(",")]
                if len(fields) != 3:
                    raise FileFormatError(f"expected 're,im,radius', got {text!r}", line, path)
                try:
                    discs.append(Disc(complex(float(fields[0]), float(fields[1])), float(fields[2])))
                except (ValueError, DegenerateInputError) as e:
                    raise FileFormatError(str(e), line, path)
    except OSError as e:
        raise FileFormatError(f"cannot read disc file: {e}", path=path)
    return discs


# פקודות שורת הפקודה
class ZipmapCommands:
    def __init__(self, args, config: Config):
        self.args = args
        self.config = config
        self.status = EXIT_OK

    def summary_message(self, items, description):
        """הודעת סיכום בסיום הפעלת פקודה"""
        self.counting = len(items)
        colour = colors.GREEN if self.status == EXIT_OK else colors.YELLOW
        if self.counting < 1:
            return f'{colour}Nothing to report{colors.RESET}'
        return f'{colour}{description}: {self.counting}{colors.RESET}'

    def run_func(self, func_name) -> int:
        '''הפעלת הפקודה המבוקשת והדפסת הסיכום'''
        func = getattr(self, func_name, None)
        if not callable(func):
            raise UsageError(f"unknown command {func_name!r}")
        items, description = func()
        print(self.summary_message(items, description), file=sys.stderr)
        return self.status

    # --------------------------- build / normalize --------------------------- #

    def build(self):
        args = self.args
        points = read_points(args.input)
        started = time.perf_counter()
        pipeline = build(points, args.algo, self.config)
        elapsed = time.perf_counter() - started
        if args.normalize is not None:
            pipeline = normalize_to_disc(pipeline, args.normalize, args.fix_index, self.config)
        save_pipeline(args.out, pipeline)
        print(f"n = {len(pipeline)}")
        print(f"build time = {elapsed:.3f}s")
        print(f"max |Im(data image)| = {data_image_residual(pipeline):.3e}")
        return pipeline.data_points, 'Data points mapped'

    def normalize(self):
        args = self.args
        pipeline = load_pipeline(args.pipeline, self.config)
        pipeline = normalize_to_disc(pipeline, args.interior, args.fix_index, self.config)
        save_pipeline(args.out or args.pipeline, pipeline)
        return pipeline.data_points, 'Prevertices on the unit circle'

    # --------------------------- evaluation --------------------------- #

    def eval(self):
        args = self.args
        pipeline = load_pipeline(args.pipeline, self.config)
        points = read_points(args.input, minimum=1)
        if args.dir == "inv":
            results = eval_inverse_many(pipeline, points, self.config)
        elif args.mode == "extension":
            policy = BranchPolicy("extension", args.seed)
            results = []
            for index, z in enumerate(points):
                try:
                    results.append(eval_forward(pipeline, z, policy))
                except (AmbiguousBranchError, NewtonConvergenceError) as e:
                    logger.error(f"row {index + 1}: {e}")
                    results.append(None)
                    self.status = EXIT_NUMERICAL
        else:
            results = eval_forward_many(pipeline, points, BranchPolicy(args.mode), self.config)
        write_points(args.out, results)
        if args.dir == "fwd" and args.mode == "interior":
            self.report_round_trip(pipeline, points, results)
        failed = [r for r in results if r is None]
        if failed:
            return failed, 'Rows without a value'
        return results, 'Points evaluated'

    def report_round_trip(self, pipeline, points, images):
        # chordal distance, so points at infinity take part
        pairs = [(z, w) for z, w in zip(points, images) if w is not None]
        if not pairs:
            return
        back = eval_inverse_many(pipeline, [w for _, w in pairs], self.config)
        errors = [spherical_distance(b, z) for (z, _), b in zip(pairs, back) if b is not None]
        if errors:
            print(f"max round trip error = {max(errors):.3e}")

    # --------------------------- curves --------------------------- #

    def boundary(self):
        args = self.args
        pipeline = load_pipeline(args.pipeline, self.config)
        curve = boundary_sample(pipeline, args.per_arc, self.config)
        write_boundary(args.out, curve, pipeline.data_points)
        return curve.points, 'Boundary points written'

    def grid(self):
        args = self.args
        pipeline = load_pipeline(args.pipeline, self.config)
        curves = grid_curves(pipeline, args.kind, args.rings, args.rays, args.samples, args.rings_geometric,
                             self.config)
        if args.out.lower().endswith(".svg"):
            outline = boundary_sample(pipeline, args.boundary_per_arc, self.config)
            boundary = np.array([z for z in outline.points if z is not INF], dtype=complex)
            write_grid_svg(args.out, curves, boundary)
        else:
            write_grid_csv(args.out, curves)
        return curves, 'Grid curves written'

    # --------------------------- checks --------------------------- #

    def validate(self):
        args = self.args
        check = args.check
        value = None
        if check == "disc-chain":
            report = validate_disc_chain(DiscChain(tuple(read_discs(args.input)), closed=args.closed,
                                                   tolerance=self.config.chain_tolerance))
        else:
            points = read_points(args.input)
            eps = args.eps if args.eps is not None else self.config.eps0
            if check == "pacman":
                report = pacman_condition(points, eps, args.c1 if args.c1 is not None else self.config.c1)
            elif check == "turning":
                report = turning_angle_check(points, eps)
            elif check == "separation":
                factor = args.factor if args.factor is not None else self.config.separation_factor
                report = neighborhood_separation_check(points, factor)
            else:
                report = ChainReport(check=check)
                if check == "spacing":
                    value = spacing_constant(points)
                elif check == "mesh":
                    value = mesh_size(points, closed=args.closed)
                else:
                    value = quasicircle_constant(Polyline(tuple(points), closed=True), args.max_triples)
                if args.max is not None and value > args.max:
                    report.add(check, (), value)
        document = report.to_dict()
        if value is not None:
            document["value"] = value
        print(json.dumps(document, indent=4))
        if not report.ok:
            self.status = EXIT_VALIDATION
        return report.violations, 'Violations'

    def selftest(self):
        args = self.args
        sizes = SELFTEST_TABLE if args.table else (args.n,)
        rows = []
        for n in sizes:
            if n < 8:
                raise PreconditionError(f"the self-test needs N >= 8, got {n}")
            started = time.perf_counter()
            error = prevertex_angle_error(args.algo, n, args.r, self.config)
            elapsed = time.perf_counter() - started
            threshold = self.config.selftest_threshold(args.algo, n)
            passed = error < threshold
            rows.append((n, error, elapsed, threshold))
            colour = colors.GREEN if passed else colors.RED
            print(f"{colour}{args.algo:9s} N={n:6d}  max error={error:.3e}  "
                  f"threshold={threshold:.1e}  time={elapsed:.2f}s{colors.RESET}")
            if not passed:
                self.status = EXIT_VALIDATION
        if args.table:
            ns = np.array([row[0] for row in rows], dtype=float)
            errs = np.array([row[1] for row in rows], dtype=float)
            rate = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
            print(f"fitted rate: error ~ N^-{rate:.2f}")
            if np.any(np.diff(errs) >= 0):
                logger.warning("self-test errors do not decrease with N")
                self.status = EXIT_VALIDATION
        return rows, 'Self-test runs'

    def weld(self):
        args = self.args
        pipeline = weld_build(WeldingSpec(tuple(args.x), tuple(args.y)), self.config)
        for x, y, z in zip(args.x, args.y, pipeline.data_points):
            print(f"{x:.17g} ~ {y:.17g} -> {z.real:.17g},{z.imag:.17g}")
        if args.out:
            save_pipeline(args.out, pipeline)
        return pipeline.data_points, 'Welded pairs'


def make_parser() -> argparse.ArgumentParser:
    parser = ZipmapArgumentParser(prog="zipmap", description='Numerical conformal maps by the geodesic, slit '
                                                             'and zipper algorithms')
    parser.add_argument('--verbose', '-v', action='store_true', help='debug logging')
    parser.add_argument('--log-file', help='write the log to a file instead of stderr')
    parser.add_argument('--workers', type=int, help='threads for point evaluation')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=ZipmapArgumentParser)

    p = sub.add_parser('build', help='build a map from a point file')
    p.add_argument('--algo', choices=VARIANTS, default='geodesic')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--normalize', type=complex_arg, metavar='RE,IM', help='interior point sent to 0')
    p.add_argument('--fix-index', type=int, default=0, help='data point sent to 1 when normalizing')

    p = sub.add_parser('eval', help='evaluate the map or its inverse')
    p.add_argument('--pipeline', required=True)
    p.add_argument('--dir', choices=('fwd', 'inv'), default='fwd')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--mode', choices=('interior', 'exterior', 'extension'), default='interior')
    p.add_argument('--seed', type=complex_arg, metavar='RE,IM', help='start of the continuation path')

    p = sub.add_parser('boundary', help='sample the computed boundary curve')
    p.add_argument('--pipeline', required=True)
    p.add_argument('--per-arc', type=int, default=16)
    p.add_argument('--out', required=True)

    p = sub.add_parser('grid', help='images of a polar or cartesian grid on the disc')
    p.add_argument('--pipeline', required=True)
    p.add_argument('--kind', choices=('polar', 'cartesian'), default='polar')
    p.add_argument('--rings', type=int, default=8)
    p.add_argument('--rays', type=int, default=16)
    p.add_argument('--samples', type=int, default=128)
    p.add_argument('--rings-geometric', action='store_true', help='rings at radii 1 - 2^-k')
    p.add_argument('--boundary-per-arc', type=int, default=8)
    p.add_argument('--out', required=True, help='.svg or .csv')

    p = sub.add_parser('validate', help='geometric checks on points or discs')
    p.add_argument('--check', choices=CHECKS, required=True)
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--eps', type=float)
    p.add_argument('--c1', type=float, help=f'pacman radius constant (default {DEFAULT_C1})')
    p.add_argument('--factor', type=float, help='neighbourhood factor of the separation check')
    p.add_argument('--closed', action='store_true')
    p.add_argument('--max', type=float, help='fail when the computed constant exceeds this value')
    p.add_argument('--max-triples', type=int, default=2_000_000)

    p = sub.add_parser('selftest', help='inverted ellipse accuracy test')
    p.add_argument('--algo', choices=VARIANTS, default='geodesic')
    p.add_argument('--n', type=int, default=1000)
    p.add_argument('--r', type=float, default=0.95)
    p.add_argument('--table', action='store_true', help=f'run N in {SELFTEST_TABLE} and fit the rate')

    p = sub.add_parser('normalize', help='map a stored pipeline onto the unit disc')
    p.add_argument('--pipeline', required=True)
    p.add_argument('--interior', type=complex_arg, required=True, metavar='RE,IM')
    p.add_argument('--fix-index', type=int, default=0)
    p.add_argument('--out')

    p = sub.add_parser('weld', help='conformal welding of x_j to y_j')
    p.add_argument('--x', type=float_list, required=True)
    p.add_argument('--y', type=float_list, required=True)
    p.add_argument('--out')
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    setup_logging(args.verbose, args.log_file)
    try:
        config = Config.from_env()
        if args.workers is not None:
            if args.workers < 1:
                raise PreconditionError("--workers must be at least 1")
            config = replace(config, workers=args.workers)
        return ZipmapCommands(args, config).run_func(args.command)
    except (FileFormatError, PreconditionError, DegenerateInputError, UsageError) as e:
        print(f"{colors.RED}error: {e}{colors.RESET}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"cannot access {e.filename or 'a file'}: {e.strerror or e}")
        print(f"{colors.RED}error: {e}{colors.RESET}", file=sys.stderr)
        return EXIT_USAGE
    except ZipmapError as e:
        print(f"{colors.RED}error: {e}{colors.RESET}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
