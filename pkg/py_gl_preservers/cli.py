import argparse
import asyncio
import logging
import sys
from typing import Optional, Sequence, Any, Dict

from py_gl_preservers import exceptions
from py_gl_preservers.algebras import DivisionAlgebraSpec, PresetName
from py_gl_preservers.data import config
from py_gl_preservers.fields import FieldSpec, Polynomial
from py_gl_preservers.matrices import Matrix
from py_gl_preservers.preservers import MatEndo, unit_vector
from py_gl_preservers.subspaces import MatrixSubspace
from py_gl_preservers.utils import load_document, to_json, write_json
from py_gl_preservers.workbench import Workbench

logger = logging.getLogger(__name__)

LIBRARY_ERRORS = (
    exceptions.FieldException, exceptions.MatrixException, exceptions.SubspaceException,
    exceptions.PreserverException, exceptions.AlgebraException, exceptions.HarnessException
)
ANOMALY_ERRORS = (exceptions.ClassificationAnomaly, exceptions.WorkerFailure)


class ArgumentParser(argparse.ArgumentParser):
    """An argument parser that raises CLIException instead of exiting on usage errors."""

    def error(self, message: str):
        raise exceptions.CLIException(message, payload={'usage': self.format_usage().strip()})


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--field', default='gf:2', help="the field, 'gf:p' or 'q' (gf:2)")
    common.add_argument('--n', type=int, default=2, help='the matrix size (2)')
    common.add_argument('--budget', type=int, default=config.BUDGET, help='the enumeration budget (GLP_BUDGET)')
    common.add_argument('--samples', type=int, default=config.SAMPLES, help='random samples (GLP_SAMPLES)')
    common.add_argument('--jobs', type=int, default=config.JOBS, help='worker processes (GLP_JOBS)')
    common.add_argument('--seed', type=int, default=config.SEED, help='the random seed (GLP_SEED)')
    common.add_argument('--out', help='also write the JSON result to this file')
    common.add_argument('--json-errors', action='store_true', help='print errors as JSON')
    common.add_argument('--log-level', default=config.LOG_LEVEL, help='the logging level (GLP_LOG_LEVEL)')
    common.add_argument('--quiet', action='store_true', help='disable progress bars')
    return common


def build_parser() -> ArgumentParser:
    """
    Build the command-line parser.

    Returns:
        ArgumentParser: the parser.

    """
    common = _common()
    parser = ArgumentParser(
        prog='py-gl-preservers', description='Build, test and classify linear maps preserving invertible matrices.'
    )
    commands = parser.add_subparsers(dest='command', required=True, parser_class=ArgumentParser)

    build = commands.add_parser('build', help='build a preserver')
    kinds = build.add_subparsers(dest='kind', required=True, parser_class=ArgumentParser)
    for kind in ('u', 'v'):
        frobenius = kinds.add_parser(kind, parents=[common], help=f'the Frobenius map {kind}_(P,Q)')
        frobenius.add_argument('--P', required=True, help='the left factor (file or inline JSON)')
        frobenius.add_argument('--Q', required=True, help='the right factor (file or inline JSON)')

    pinch = kinds.add_parser('pinch', parents=[common], help='a pinch map through a full non-singular subspace')
    source = pinch.add_mutually_exclusive_group(required=True)
    source.add_argument('--subspace', help='the subspace (file or inline JSON)')
    source.add_argument('--preset', choices=PresetName.All, help='use the subspace of a preset algebra')
    pinch.add_argument('--poly', help='the polynomial of the companion preset')
    pinch.add_argument('--A', help='the coordinate isomorphism (identity)')
    pinch.add_argument('--X', help='the column vector (e_1)')
    pinch.add_argument('--twisted', action='store_true', help='compose with the transposition')

    classify = commands.add_parser('classify', parents=[common], help='classify an endomorphism')
    classify.add_argument('--endo', required=True, help='the endomorphism (file or inline JSON)')

    preserves = commands.add_parser('preserves', parents=[common], help='test GL-preservation')
    preserves.add_argument('--endo', required=True, help='the endomorphism (file or inline JSON)')

    subspace = commands.add_parser('subspace', help='matrix subspaces')
    actions = subspace.add_subparsers(dest='action', required=True, parser_class=ArgumentParser)
    make_ld = actions.add_parser('make-ld', parents=[common], help='L_D, the matrices vanishing on span(X)')
    make_ld.add_argument('--X', required=True, help='a nonzero column vector')
    make_lh = actions.add_parser('make-lh', parents=[common], help='L^H, the matrices with image in ker(Y^t)')
    make_lh.add_argument('--Y', required=True, help='a nonzero column vector')
    for action, text in (('classify', 'the type of a maximal singular subspace'),
                         ('is-singular', 'test whether every element is singular'),
                         ('is-nonsingular', 'test whether every nonzero element is invertible')):
        parser_ = actions.add_parser(action, parents=[common], help=text)
        parser_.add_argument('--in', dest='input', required=True, help='the subspace (file or inline JSON)')

    algebra = commands.add_parser('algebra', help='division algebras')
    actions = algebra.add_subparsers(dest='action', required=True, parser_class=ArgumentParser)
    preset = actions.add_parser('preset', parents=[common], help='a shipped algebra')
    preset.add_argument('--name', required=True, choices=PresetName.All)
    preset.add_argument('--poly', help='the polynomial of the companion preset')
    from_subspace = actions.add_parser('from-subspace', parents=[common], help='the algebra of a subspace')
    from_subspace.add_argument('--in', dest='input', required=True, help='the subspace (file or inline JSON)')
    to_subspace = actions.add_parser('to-subspace', parents=[common], help='the subspace of left multiplications')
    to_subspace.add_argument('--in', dest='input', required=True, help='the algebra (file or inline JSON)')
    to_subspace.add_argument('--override', action='store_true', help='skip the division check')
    is_division = actions.add_parser('is-division', parents=[common], help='test the division property')
    is_division.add_argument('--in', dest='input', required=True, help='the algebra (file or inline JSON)')

    enumerate_ = commands.add_parser('enumerate', parents=[common], help='scan every endomorphism of M_n(GF(p))')
    enumerate_.add_argument('--allow-long', action='store_true', help='allow long campaigns')
    enumerate_.add_argument('--ignore-cap', action='store_true', help='allow campaigns above the hard cap')
    enumerate_.add_argument('--resume', help='an incomplete report to resume from')
    enumerate_.add_argument('--no-early-exit', dest='early_exit', action='store_false',
                            help='test every matrix even after a refutation')

    verify = commands.add_parser('verify', help='audits')
    audits = verify.add_subparsers(dest='audit', required=True, parser_class=ArgumentParser)
    for audit in ('theorem1', 'dieudonne', 'span', 'onto', 'lines', 'early-exit'):
        parser_ = audits.add_parser(audit, parents=[common])
        parser_.add_argument('--allow-long', action='store_true', help='allow long campaigns')
        parser_.add_argument('--ignore-cap', action='store_true', help='allow campaigns above the hard cap')
        if audit == 'theorem1':
            parser_.add_argument('--sampled', action='store_true', help='test random maps instead of a campaign')

    report = commands.add_parser('report', help='reports')
    actions = report.add_subparsers(dest='action', required=True, parser_class=ArgumentParser)
    render = actions.add_parser('render', parents=[common], help='render a JSON report as text')
    render.add_argument('--in', dest='input', required=True, help='the report (file or inline JSON)')
    return parser


def _matrix(value: str, field: FieldSpec) -> Matrix:
    document = load_document(value)
    if isinstance(document, list) and document and not isinstance(document[0], list):
        return Matrix.column(field, document)

    if isinstance(document, list):
        return Matrix.from_rows(field, document)

    return Matrix.from_dict(document, field=field)


def _poly(value: Optional[str], field: FieldSpec) -> Optional[Polynomial]:
    return Polynomial.parse(field, value) if value else None


def _emit(args: argparse.Namespace, data: Any) -> None:
    if args.out:
        write_json(args.out, data)

    print(to_json(data))


def _campaign(workbench: Workbench, args: argparse.Namespace):
    return workbench.harness.config(
        out=args.out, resume=getattr(args, 'resume', None), allow_long=getattr(args, 'allow_long', False),
        ignore_cap=getattr(args, 'ignore_cap', False), early_exit=getattr(args, 'early_exit', True)
    )


def _build(workbench: Workbench, args: argparse.Namespace) -> Dict[str, Any]:
    field = workbench.field
    if args.kind in ('u', 'v'):
        build = workbench.preservers.build_u if args.kind == 'u' else workbench.preservers.build_v
        return build(_matrix(args.P, field), _matrix(args.Q, field)).to_dict()

    if args.subspace:
        subspace = MatrixSubspace.from_dict(load_document(args.subspace), field=field)

    else:
        algebra = workbench.algebras.preset(args.preset, field, _poly(args.poly, field))
        subspace = workbench.algebras.to_subspace(algebra)

    n = subspace.n
    a = _matrix(args.A, field) if args.A else Matrix.identity(field, n)
    x = _matrix(args.X, field) if args.X else unit_vector(field, n)
    return workbench.preservers.build_pinch(subspace, a, x, args.twisted).to_dict()


def _subspace(workbench: Workbench, args: argparse.Namespace) -> Dict[str, Any]:
    field = workbench.field
    if args.action == 'make-ld':
        return workbench.subspaces.make_LD(_matrix(args.X, field)).to_dict()

    if args.action == 'make-lh':
        return workbench.subspaces.make_LH(_matrix(args.Y, field)).to_dict()

    subspace = MatrixSubspace.from_dict(load_document(args.input), field=field)
    if args.action == 'classify':
        return workbench.subspaces.classify_maximal_singular(subspace).to_dict()

    if args.action == 'is-singular':
        return workbench.subspaces.is_singular_subspace(subspace).to_dict()

    return dict(workbench.subspaces.is_full_nonsingular(subspace).to_dict(), seed=workbench.seed)


def _algebra(workbench: Workbench, args: argparse.Namespace) -> Dict[str, Any]:
    field = workbench.field
    if args.action == 'preset':
        return workbench.algebras.preset(args.name, field, _poly(args.poly, field)).to_dict()

    if args.action == 'from-subspace':
        subspace = MatrixSubspace.from_dict(load_document(args.input), field=field)
        return workbench.algebras.from_subspace(subspace).to_dict()

    algebra = DivisionAlgebraSpec.from_dict(load_document(args.input), field=field)
    if args.action == 'to-subspace':
        return workbench.algebras.to_subspace(algebra, override=args.override).to_dict()

    return dict(workbench.algebras.is_division(algebra).to_dict(), seed=workbench.seed)


def _verify(workbench: Workbench, args: argparse.Namespace) -> Dict[str, Any]:
    harness = workbench.harness
    cfg = _campaign(workbench, args)
    cfg.out = None
    if args.audit == 'theorem1':
        report = asyncio.run(harness.verify_theorem1(cfg, sampled=args.sampled))

    elif args.audit == 'dieudonne':
        report = harness.run_dieudonne(cfg)

    elif args.audit == 'span':
        report = harness.run_span(cfg)

    elif args.audit == 'onto':
        report = asyncio.run(harness.run_onto(cfg))

    elif args.audit == 'lines':
        report = asyncio.run(harness.run_lines(cfg))

    else:
        report = harness.early_exit_audit(cfg, samples=args.samples)

    return dict(report.to_dict(), seed=workbench.seed)


def dispatch(args: argparse.Namespace) -> int:
    """
    Run a parsed command.

    Args:
        args (argparse.Namespace): the parsed arguments.

    Returns:
        int: the exit code, 0 if nothing anomalous was found and 1 otherwise.

    """
    workbench = Workbench(
        field=args.field, n=args.n, budget=args.budget, samples=args.samples, jobs=args.jobs, seed=args.seed,
        quiet=args.quiet
    )
    logger.debug(f'{workbench}: {args.command}')
    if args.command == 'report':
        document = load_document(args.input)
        print(workbench.harness.render(document))
        return 0 if document.get('passed') else 1

    if args.command == 'build':
        data = _build(workbench, args)

    elif args.command == 'classify':
        endo = MatEndo.from_dict(load_document(args.endo), field=workbench.field)
        data = dict(workbench.preservers.classify(endo).to_dict(), seed=workbench.seed)

    elif args.command == 'preserves':
        endo = MatEndo.from_dict(load_document(args.endo), field=workbench.field)
        data = dict(workbench.preservers.preserves_GL(endo).to_dict(), seed=workbench.seed)

    elif args.command == 'subspace':
        data = _subspace(workbench, args)

    elif args.command == 'algebra':
        data = _algebra(workbench, args)

    elif args.command == 'enumerate':
        cfg = _campaign(workbench, args)
        report = asyncio.run(workbench.harness.enumerate_preservers(cfg))
        print(to_json(report.to_dict()))
        return 0 if report.passed else 1

    else:
        data = _verify(workbench, args)

    _emit(args, data)
    return 0 if data.get('passed', True) else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    The command-line entry point.

    Args:
        argv (Optional[Sequence[str]]): the arguments. (sys.argv[1:])

    Returns:
        int: the exit code.

    """
    argv = list(sys.argv[1:] if argv is None else argv)
    json_errors = '--json-errors' in argv
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
            format='%(asctime)s %(levelname)s %(name)s: %(message)s'
        )
        return dispatch(args)

    except exceptions.CLIException as e:
        error = e

    except ANOMALY_ERRORS as e:
        error = exceptions.CLIException(str(e), payload={'type': type(e).__name__}, exit_code=1)

    except LIBRARY_ERRORS as e:
        error = exceptions.CLIException(str(e), payload={'type': type(e).__name__})

    except (OSError, KeyError, ValueError) as e:
        error = exceptions.CLIException(str(e), payload={'type': type(e).__name__})

    if json_errors:
        print(error.to_json())

    else:
        print(f'error: {error}', file=sys.stderr)

    return error.exit_code
