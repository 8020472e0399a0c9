from __future__ import annotations

import asyncio
import logging
import random
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from typing import TYPE_CHECKING, Optional, List, Dict, Any, Set, Tuple

from tqdm import tqdm

from py_gl_preservers import exceptions
from py_gl_preservers.data import config
from py_gl_preservers.data.models import (
    CampaignConfig, EnumerationReport, AuditReport, ClassificationTag, ExpectedSets
)
from py_gl_preservers.data.types import MapCode
from py_gl_preservers.fields import FieldSpec
from py_gl_preservers.matrices import Matrix, general_linear_group, all_nonzero_vectors
from py_gl_preservers.packed import PackedSpace, packed_space
from py_gl_preservers.preservers import build_u, build_v, build_pinch
from py_gl_preservers.utils import digest, read_json, write_json

if TYPE_CHECKING:
    from py_gl_preservers.workbench import Workbench

logger = logging.getLogger(__name__)

SPAN_GRID = ((2, 'gf:2'), (2, 'gf:3'), (3, 'gf:2'), (3, 'gf:3'))
EARLY_EXIT_SAMPLES = 10 ** 5


def scan_partition(task: Dict[str, Any]) -> Dict[str, Any]:
    """
    Scan and classify every map of one partition. Runs in worker processes, so it takes and returns plain data.

    Args:
        task (Dict[str, Any]): the field, n, budget, samples, seed, early_exit flag, test codes and the first column
            code of the partition.

    Returns:
        Dict[str, Any]: the partition, the number of scanned maps and one record per preserver found.

    """
    from py_gl_preservers.workbench import Workbench

    workbench = Workbench(
        field=task['field'], n=task['n'], budget=task['budget'], samples=task['samples'], seed=task['seed']
    )
    space = packed_space(workbench.field, workbench.n, workbench.budget)
    found, scanned = space.scan(task['first'], task['tests'], task['early_exit'])
    records = []
    for code in found:
        endo = space.decode_endo(code)
        record = {'code': list(code), 'tag': None, 'bijective': endo.is_bijective(), 'rank': endo.rank(),
                  'reconstructed': False, 'error': None}
        try:
            classification = workbench.preservers.classify(endo)
            record['tag'] = classification.tag
            record['reconstructed'] = workbench.preservers.reconstruct(classification) == endo

        except (exceptions.PreserverException, exceptions.SubspaceException, exceptions.MatrixException) as e:
            record['error'] = f'{type(e).__name__}: {e}'

        records.append(record)

    return {'partition': task['first'], 'scanned': scanned, 'records': records}


class Harness:
    """
    Exhaustive enumeration campaigns over small prime fields and the audits built on their results.
    """

    def __init__(self, workbench: Workbench) -> None:
        """
        Initialize the class.

        Args:
            workbench (Workbench): the Workbench instance.

        """
        self.workbench = workbench
        self.preserver_sets: Dict[Tuple[str, int], List[MapCode]] = {}

    def config(self, **overrides) -> CampaignConfig:
        """
        Make a campaign configuration from the workbench settings.

        Args:
            **overrides: CampaignConfig fields to replace.

        Returns:
            CampaignConfig: the configuration.

        """
        cfg = CampaignConfig(
            field=str(self.workbench.field), n=self.workbench.n, budget=self.workbench.budget,
            samples=self.workbench.samples, jobs=self.workbench.jobs, seed=self.workbench.seed,
            quiet=self.workbench.quiet
        )
        for name, value in overrides.items():
            setattr(cfg, name, value)

        return cfg

    @staticmethod
    def _space(cfg: CampaignConfig) -> PackedSpace:
        field = FieldSpec.parse(cfg.field)
        if not field.is_finite:
            raise exceptions.HarnessException('Campaigns run over prime fields only!')

        if cfg.n < 2:
            raise exceptions.HarnessException('Campaigns need n >= 2!')

        return packed_space(field, cfg.n, cfg.budget)

    @staticmethod
    def check_cap(cfg: CampaignConfig, total: int) -> None:
        """
        Refuse campaigns that are too long for the given flags.

        Args:
            cfg (CampaignConfig): the configuration.
            total (int): the number of maps to scan.

        """
        if total > config.MAP_CAP and not (cfg.allow_long and cfg.ignore_cap):
            raise exceptions.CapExceeded(
                f'{total} maps exceed the hard cap {config.MAP_CAP}, both allow_long and ignore_cap are required!'
            )

        if total > config.LONG_JOB and not cfg.allow_long:
            raise exceptions.CapExceeded(f'{total} maps make a long job, allow_long is required!')

    def expected_sets(self, space: PackedSpace) -> ExpectedSets:
        """
        Generate the preservers constructively: every u_{P,Q} and v_{P,Q}, and every pinch map through a full
            non-singular subspace, coordinate isomorphism, normalized vector and twist.

        Args:
            space (PackedSpace): the packed space.

        Returns:
            ExpectedSets: the Frobenius and pinch codes and the number of full non-singular subspaces.

        """
        field = space.field
        n = space.n
        group = general_linear_group(field, n)
        frobenius = set()
        for p in group:
            for q in group:
                frobenius.add(space.encode_endo(build_u(p, q)))
                frobenius.add(space.encode_endo(build_v(p, q)))

        subspaces = self.workbench.subspaces.full_nonsingular_scan(n, field)
        vectors = list(all_nonzero_vectors(field, n, normalized=True))
        pinch = set()
        for subspace in subspaces:
            for a in group:
                for x in vectors:
                    for twisted in (False, True):
                        pinch.add(space.encode_endo(build_pinch(subspace, a, x, twisted)))

        logger.debug(f'Expected over {field}, n={n}: {len(frobenius)} Frobenius, {len(pinch)} pinch maps')
        return ExpectedSets(frobenius=frobenius, pinch=pinch, subspaces=len(subspaces))

    def _resume(self, cfg: CampaignConfig, report: EnumerationReport) -> EnumerationReport:
        previous = EnumerationReport.from_dict(read_json(cfg.resume))
        if (previous.field, previous.n, previous.seed) != (report.field, report.n, report.seed):
            raise exceptions.HarnessException(
                f'{cfg.resume} belongs to {previous.field}, n={previous.n}, seed={previous.seed}, '
                f'not to {report.field}, n={report.n}, seed={report.seed}!'
            )

        if previous.complete:
            logger.info(f'{cfg.resume} is already complete, scanning again')
            return report

        logger.info(f'Resuming from {cfg.resume}: {len(previous.partitions)} of {previous.partition_count} partitions')
        previous.anomalies = []
        return previous

    @staticmethod
    def _merge(report: EnumerationReport, result: Dict[str, Any]) -> None:
        report.partitions.append(result['partition'])
        report.scanned_maps += result['scanned']
        report.records.extend(result['records'])

    async def _run_tasks(self, cfg: CampaignConfig, tasks: List[Dict[str, Any]],
                         report: EnumerationReport) -> List[int]:
        dropped = []
        progress = tqdm(total=len(tasks), desc=f'{cfg.field} n={cfg.n}', unit='partition', disable=cfg.quiet)
        if cfg.jobs <= 1:
            for task in tasks:
                try:
                    self._merge(report, scan_partition(task))

                except Exception as e:
                    logger.error(f'Partition {task["first"]} failed: {e}')
                    dropped.append(task['first'])

                else:
                    if cfg.out:
                        write_json(cfg.out, report.to_dict())

                progress.update()
                await asyncio.sleep(0)

        else:
            loop = asyncio.get_running_loop()
            with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
                futures = {loop.run_in_executor(pool, scan_partition, task): task['first'] for task in tasks}
                pending = set(futures)
                while pending:
                    done, pending = await asyncio.wait(pending, return_when=asyncio.FIRST_COMPLETED)
                    for future in done:
                        try:
                            self._merge(report, future.result())

                        except Exception as e:
                            logger.error(f'Partition {futures[future]} failed: {e}')
                            dropped.append(futures[future])

                        else:
                            if cfg.out:
                                write_json(cfg.out, report.to_dict())

                        progress.update()

        progress.close()
        return sorted(dropped)

    async def enumerate_preservers(self, cfg: Optional[CampaignConfig] = None) -> EnumerationReport:
        """
        Scan every linear endomorphism of M_n(GF(p)), classify every GL-preserver found and compare the preserver
            set with the constructively generated one.

        Args:
            cfg (Optional[CampaignConfig]): the configuration. (workbench settings)

        Returns:
            EnumerationReport: the report.

        """
        cfg = cfg or self.config()
        started = time.monotonic()
        space = self._space(cfg)
        total = space.size ** space.m
        self.check_cap(cfg, total)
        report = EnumerationReport(
            field=str(space.field), n=space.n, total_maps=total, partition_count=space.size, seed=cfg.seed
        )
        if cfg.resume:
            report = self._resume(cfg, report)

        logger.info(f'Enumerating {total} maps over {space.field}, n={space.n}, {cfg.jobs} job(s)')
        tests = space.test_order(cfg.seed)
        done = set(report.partitions)
        tasks = [
            {'field': cfg.field, 'n': cfg.n, 'budget': cfg.budget, 'samples': cfg.samples, 'seed': cfg.seed,
             'early_exit': cfg.early_exit, 'tests': tests, 'first': first}
            for first in range(space.size) if first not in done
        ]
        dropped = await self._run_tasks(cfg, tasks, report)
        report.partitions = sorted(report.partitions)
        report.records = sorted(report.records, key=lambda record: record['code'])
        report.complete = not dropped and len(report.partitions) == report.partition_count
        report.anomalies.extend(space.cross_check(random.Random(cfg.seed)))
        self._tally(space, report)
        for anomaly in report.anomalies:
            logger.error(anomaly)

        report.wall_time = round(time.monotonic() - started, 3)
        if cfg.out:
            write_json(cfg.out, report.to_dict())

        if dropped:
            raise exceptions.WorkerFailure(
                f'Partitions {dropped} were dropped, the report is incomplete'
                + (f' and was saved to {cfg.out}!' if cfg.out else '!')
            )

        logger.info(f'{report.preserver_count} preservers, {len(report.anomalies)} anomalies, {report.wall_time}s')
        return report

    def _tally(self, space: PackedSpace, report: EnumerationReport) -> None:
        n = space.n
        histogram = Counter()
        found: Set[MapCode] = set()
        for record in report.records:
            code = tuple(record['code'])
            found.add(code)
            histogram[record['tag'] or ClassificationTag.Unverified] += 1
            if record['error']:
                report.anomalies.append(f'{code}: {record["error"]}')

            elif not record['reconstructed']:
                report.anomalies.append(f'{code}: the classification does not reconstruct the map')

            if record['bijective'] and record['tag'] not in ClassificationTag.Frobenius:
                report.anomalies.append(f'{code}: a bijective preserver is classified {record["tag"]}')

            if not record['bijective'] and record['tag'] not in ClassificationTag.Pinch:
                report.anomalies.append(f'{code}: a singular preserver is classified {record["tag"]}')

            if record['rank'] not in (n, n * n):
                report.anomalies.append(f'{code}: a preserver of rank {record["rank"]}')

        report.preserver_count = len(found)
        report.bijective_count = sum(1 for record in report.records if record['bijective'])
        report.singular_count = report.preserver_count - report.bijective_count
        report.class_histogram = {tag: histogram.get(tag, 0) for tag in ClassificationTag.All}
        report.preserver_digest = digest([list(code) for code in found])
        if not report.complete:
            return

        expected = self.expected_sets(space)
        report.frobenius_expected = len(expected.frobenius)
        report.pinch_expected = len(expected.pinch)
        report.full_nonsingular_subspaces = expected.subspaces
        for code in sorted(found - expected.all):
            report.anomalies.append(f'{code}: a preserver outside the constructive set')

        for code in sorted(expected.all - found):
            report.anomalies.append(f'{code}: a constructive preserver the scan did not find')

        self.preserver_sets[(report.field, report.n)] = sorted(found)

    async def preserver_codes(self, cfg: Optional[CampaignConfig] = None) -> List[MapCode]:
        """The preserver set of the latest complete campaign, running one if there is none."""
        cfg = cfg or self.config()
        key = (str(FieldSpec.parse(cfg.field)), cfg.n)
        if key not in self.preserver_sets:
            report = await self.enumerate_preservers(CampaignConfig(
                field=cfg.field, n=cfg.n, budget=cfg.budget, samples=cfg.samples, jobs=cfg.jobs, seed=cfg.seed,
                allow_long=cfg.allow_long, ignore_cap=cfg.ignore_cap, quiet=cfg.quiet
            ))
            if not report.complete:
                raise exceptions.HarnessException(f'The campaign over {cfg.field}, n={cfg.n} is incomplete!')

        return self.preserver_sets[key]

    async def verify_theorem1(self, cfg: Optional[CampaignConfig] = None, sampled: bool = False) -> AuditReport:
        """
        Check that the maps with f(GL) = GL, the maps with f^-1(GL) = GL and the bijective preservers are the same
            set, and that B - I is singular for every truncated identity B. Every such map preserves GL, so the
            preserver set of the campaign is searched. The sampled variant tests random maps and members of the
            constructive set instead of running a campaign.

        Args:
            cfg (Optional[CampaignConfig]): the configuration. (workbench settings)
            sampled (bool): test random maps instead of the preserver set. (False)

        Returns:
            AuditReport: the report.

        """
        cfg = cfg or self.config()
        space = self._space(cfg)
        report = AuditReport(name='theorem1', field=str(space.field), n=space.n, details={'sampled': sampled})
        identity = Matrix.identity(space.field, space.n)
        for rank in range(1, space.n + 1):
            truncated = Matrix.from_rows(space.field, [
                [1 if i == j and i < rank else 0 for j in range(space.n)] for i in range(space.n)
            ])
            if (truncated - identity).is_invertible():
                report.add_anomaly(f'B - I is invertible for the truncated identity of rank {rank}')

        report.details['truncated_identities'] = space.n
        if sampled:
            self._theorem1_sampled(cfg, space, report)
            return report

        codes = await self.preserver_codes(cfg)
        onto = {code for code in codes if space.maps_gl_onto(code)}
        preimage = {code for code in codes if space.preimage_gl_is_gl(code)}
        bijective = {code for code in codes if space.decode_endo(code).is_bijective()}
        report.details.update({'onto': len(onto), 'preimage': len(preimage), 'bijective': len(bijective)})
        if onto != bijective:
            report.add_anomaly(f'{len(onto ^ bijective)} maps differ between f(GL) = GL and the bijective preservers')

        if preimage != bijective:
            report.add_anomaly(
                f'{len(preimage ^ bijective)} maps differ between f^-1(GL) = GL and the bijective preservers'
            )

        return report

    def _theorem1_sampled(self, cfg: CampaignConfig, space: PackedSpace, report: AuditReport) -> None:
        rng = random.Random(cfg.seed)
        group = general_linear_group(space.field, space.n)
        constructive = set()
        for _ in range(cfg.samples):
            p = rng.choice(group)
            q = rng.choice(group)
            constructive.add(space.encode_endo((build_v if rng.random() < 0.5 else build_u)(p, q)))

        for code in constructive:
            if not space.maps_gl_onto(code) or not space.preimage_gl_is_gl(code):
                report.add_anomaly(f'{code}: a Frobenius map fails f(GL) = GL')

        outside = 0
        for _ in range(cfg.samples):
            code = space.random_map(rng)
            if code in constructive:
                continue

            outside += 1
            if space.maps_gl_onto(code) and not space.decode_endo(code).is_bijective():
                report.add_anomaly(f'{code}: a singular map with f(GL) = GL')

            elif space.maps_gl_onto(code) and not self.workbench.preservers.classify(
                    space.decode_endo(code)).is_frobenius:
                report.add_anomaly(f'{code}: a map with f(GL) = GL outside the Frobenius maps')

        report.details.update({'constructive': len(constructive), 'random': outside})

    def run_dieudonne(self, cfg: Optional[CampaignConfig] = None) -> AuditReport:
        cfg = cfg or self.config()
        return self.workbench.subspaces.dieudonne_audit(cfg.n, FieldSpec.parse(cfg.field))

    def run_span(self, cfg: Optional[CampaignConfig] = None) -> AuditReport:
        """
        Run the span audit over the small grid of sizes and fields, and over the configured pair.

        Args:
            cfg (Optional[CampaignConfig]): the configuration. (workbench settings)

        Returns:
            AuditReport: the merged report.

        """
        cfg = cfg or self.config()
        pairs = list(SPAN_GRID)
        if (cfg.n, cfg.field) not in pairs:
            pairs.append((cfg.n, cfg.field))

        report = AuditReport(name='span', field=cfg.field, n=cfg.n)
        for n, field in pairs:
            audit = self.workbench.preservers.span_GL_audit(n, FieldSpec.parse(field))
            report.details[f'{field} n={n}'] = audit.details
            for anomaly in audit.anomalies:
                report.add_anomaly(f'{field} n={n}: {anomaly}')

        return report

    async def run_onto(self, cfg: Optional[CampaignConfig] = None) -> AuditReport:
        """Run the onto-column audit over every preserver of the campaign and every nonzero vector."""
        cfg = cfg or self.config()
        space = self._space(cfg)
        codes = await self.preserver_codes(cfg)
        vectors = list(all_nonzero_vectors(space.field, space.n))
        report = AuditReport(name='onto', field=str(space.field), n=space.n,
                             details={'preservers': len(codes), 'vectors': len(vectors)})
        for code in codes:
            endo = space.decode_endo(code)
            for x in vectors:
                if not self.workbench.preservers.onto_column_audit(endo, x, certified=True):
                    report.add_anomaly(f'{code}: M -> f(M) X is not onto for X = {list(x.entries)}')

        return report

    async def run_lines(self, cfg: Optional[CampaignConfig] = None) -> AuditReport:
        """Classify the preimages of the column-line subspaces for every preserver of the campaign."""
        cfg = cfg or self.config()
        space = self._space(cfg)
        codes = await self.preserver_codes(cfg)
        report = AuditReport(name='lines', field=str(space.field), n=space.n)
        dimensions = Counter()
        twisted = 0
        for code in codes:
            lines = self.workbench.preservers.preimage_lines(space.decode_endo(code))
            dimensions[lines.p] += 1
            twisted += lines.twisted
            if not lines.passed:
                report.add_anomaly(f'{code}: preimage lines of types {[kind.kind for kind in lines.types]}, '
                                   f'p = {lines.p}, bijective = {lines.bijective}')

        report.details.update({'preservers': len(codes), 'twisted': twisted,
                               'span_dimensions': {str(p): count for p, count in sorted(dimensions.items())}})
        return report

    def early_exit_audit(self, cfg: Optional[CampaignConfig] = None, samples: Optional[int] = None) -> AuditReport:
        """
        Compare preservation verdicts with and without early exit on random maps and on the Frobenius maps.

        Args:
            cfg (Optional[CampaignConfig]): the configuration. (workbench settings)
            samples (Optional[int]): the number of random maps. (EARLY_EXIT_SAMPLES)

        Returns:
            AuditReport: the report.

        """
        cfg = cfg or self.config()
        samples = samples or EARLY_EXIT_SAMPLES
        space = self._space(cfg)
        tests = space.test_order(cfg.seed)
        rng = random.Random(cfg.seed)
        group = general_linear_group(space.field, space.n)
        codes = [space.random_map(rng) for _ in range(samples)]
        codes.extend(space.encode_endo(build_u(rng.choice(group), rng.choice(group))) for _ in range(min(samples, 100)))
        report = AuditReport(name='early_exit', field=str(space.field), n=space.n)
        passed = 0
        for code in codes:
            early = space.preserves(code, tests, early_exit=True)
            full = space.preserves(code, tests, early_exit=False)
            passed += early is None
            if (early is None) != (full is None):
                report.add_anomaly(f'{code}: early exit changes the verdict')

        report.details.update({'maps': len(codes), 'preservers': passed})
        return report

    @staticmethod
    def render(report: Dict[str, Any]) -> str:
        """
        Render a JSON report as a human summary.

        Args:
            report (Dict[str, Any]): an enumeration or audit report.

        Returns:
            str: the summary.

        """
        status = 'PASSED' if report.get('passed') else 'FAILED'
        if 'total_maps' in report:
            lines = [
                f'Enumeration over {report["field"]}, n={report["n"]}: {status}',
                f'  maps scanned:       {report["scanned_maps"]} of {report["total_maps"]}',
                f'  partitions:         {len(report["partitions"])} of {report["partition_count"]}'
                + ('' if report.get('complete') else ' (incomplete)'),
                f'  preservers:         {report["preserver_count"]} '
                f'({report["bijective_count"]} bijective, {report["singular_count"]} singular)',
                f'  expected:           {report["frobenius_expected"]} Frobenius, {report["pinch_expected"]} pinch, '
                f'{report["full_nonsingular_subspaces"]} full non-singular subspaces',
                f'  digest:             {report["preserver_digest"]}',
                f'  wall time:          {report["wall_time"]}s',
                '  classes:'
            ]
            lines.extend(f'    {tag}: {count}' for tag, count in sorted(report['class_histogram'].items()) if count)

        else:
            lines = [f'Audit {report["name"]} over {report["field"]}, n={report["n"]}: {status}']
            lines.extend(f'  {key}: {value}' for key, value in sorted(report.get('details', {}).items()))

        anomalies = report.get('anomalies', [])
        if anomalies:
            lines.append(f'  anomalies ({len(anomalies)}):')
            lines.extend(f'    {anomaly}' for anomaly in anomalies)

        return '\n'.join(lines)
