from collections import Counter
from typing import List, Optional
import argparse
import json
import logging
import os

import numpy as np

from . import (
    EXIT_OK, EXIT_ERROR, EXIT_NOT_FOUND, EXIT_SCHEMA, EXIT_CAPACITY,
    EXIT_VALIDATION, SCHEMA_LOGICAL, SCHEMA_PHYSICAL, SCHEMA_REPORT,
    SCHEMA_RESULT, STRATEGIES)
from .benchmark import (
    estimate, random_mirror_spec, write_histogram_csv, write_result)
from .circuit import (
    LogicalCircuit, MalformedCircuitError, read_circuit, validate,
    write_circuit)
from .codes import CODES, distance, get_code, permutation_table
from .compiler import compile_circuit, cost_report, logical_unitary
from .config import Config, read_config
from .gadgets import GADGETS, SCENARIOS, emit_gadget, enumerate_faults
from .runner import (
    CONFIDENCE, HARDNESS, ShotRunner, write_metrics, write_records)
from .simulator import CapacityError, InvalidCircuitError, NoiseModel


def parse_args(argv: Optional[List[str]] = None):
    parser = argparse.ArgumentParser(
        prog='cubesquare',
        description='Code-switching compiler, noisy simulator and mirror '
                    'benchmark for the [[8,3,2]] and [[4,2,2]] codes')
    parser.add_argument(
        '-c', '--config', metavar='config', required=False,
        help='configuration json file (default: $CUBESQUARE_CONFIG, '
             'otherwise built-in defaults)')
    parser.add_argument(
        '-l', '--log', dest='log_level', nargs='+', required=False,
        type=str, default=['WARNING', 'CRITICAL'],
        help='Specify logging level for internal and external logging, '
             'respectively (Default is WARNING,CRITICAL)')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    codes = commands.add_parser('codes', help='code tables')
    codes_commands = codes.add_subparsers(dest='action', metavar='action')
    codes_commands.required = True
    info = codes_commands.add_parser(
        'info', help='stabilizers, logicals and permutation gates')
    info.add_argument('--code', choices=sorted(CODES), default=None)

    gadgets = commands.add_parser('gadgets', help='gadget library')
    gadget_commands = gadgets.add_subparsers(dest='action', metavar='action')
    gadget_commands.required = True
    gadget_commands.add_parser('list', help='list gadget names')
    emit = gadget_commands.add_parser(
        'emit', help='write one gadget as a physical circuit')
    emit.add_argument('name', choices=sorted(GADGETS))
    emit.add_argument('-o', '--output', required=True)

    compile_ = commands.add_parser(
        'compile', help='compile a logical circuit')
    compile_.add_argument('input')
    compile_.add_argument('-o', '--output', required=True)
    compile_.add_argument('--strategy', choices=STRATEGIES, default=None)
    compile_.add_argument('--epsilon', type=float, default=None)
    compile_.add_argument('--catalyst-gamma', type=float, default=1.0)
    compile_.add_argument(
        '--relocation-mode', dest='relocation', default=None,
        choices=('swap', 'teleport'))
    compile_.add_argument(
        '--corrections', default=None, choices=('apply', 'frame-track'))

    validate_ = commands.add_parser(
        'validate', help='check the invariants of a physical circuit')
    validate_.add_argument('file')

    run = commands.add_parser('run', help='simulate a physical circuit')
    run.add_argument('file')
    run.add_argument('--shots', type=int, default=1)
    run.add_argument('--seed', type=int, default=None)
    run.add_argument(
        '--noise', type=NoiseModel.from_string, default=None,
        help='p1,p2,p_meas,p_prep')
    run.add_argument('--records', default=None)
    run.add_argument('--workers', type=int, default=None)
    run.add_argument('--metrics-file', dest='metrics_file', default=None)

    faults = commands.add_parser(
        'faults', help='exhaustive single-fault injection')
    faults.add_argument('--gadget', required=True, choices=sorted(SCENARIOS))
    faults.add_argument('--seeds', type=int, default=1)

    bench = commands.add_parser('bench', help='mirror-circuit benchmark')
    bench.add_argument('--width', type=int, required=True)
    bench.add_argument('--depth', type=int, required=True)
    bench.add_argument('--hardness', type=int, default=0)
    bench.add_argument('--circuits', type=int, default=1)
    bench.add_argument('--shots', type=int, default=100)
    bench.add_argument(
        '--noise', type=NoiseModel.from_string, default=None,
        help='p1,p2,p_meas,p_prep')
    bench.add_argument('--seed', type=int, default=None)
    bench.add_argument('--oracle-mode', dest='oracle', action='store_true')
    bench.add_argument('-o', '--output', required=True)
    bench.add_argument('--csv', default=None)
    bench.add_argument('--workers', type=int, default=None)
    bench.add_argument('--metrics-file', dest='metrics_file', default=None)

    report = commands.add_parser(
        'report', help='summarise a circuit or benchmark result')
    report.add_argument('file')
    report.add_argument(
        '--reference', action='store_true',
        help='print the exact unitary of a small logical circuit')
    return parser.parse_args(argv)


def set_log_level(log_level: list) -> logging.Logger:
    level_names = [
        logging.getLevelName(i) for i in range(1, 101)
        if not logging.getLevelName(i).startswith('Level')]
    log_level = [log.upper() for log in log_level]

    if len(log_level) == 1:
        log_level = log_level[0].split(',')  # adjust for , list separation

    if len(log_level) == 1:
        log_level.append('CRITICAL')
    elif len(log_level) > 2:
        raise SystemExit(
            f'{len(log_level)} log levels given, but 2 is the maximum')

    internal_log_level, external_log_level = log_level
    if external_log_level in level_names:
        logging.basicConfig(
            level=external_log_level,
            format='[%(asctime)s] %(levelname)s: %(message)s')
    else:
        raise SystemExit(
            f'Unknown log-level: \'{external_log_level}\' try using '
            f'{*level_names,}')

    if internal_log_level in level_names:
        logger = logging.getLogger('cubesquare')
        logger.setLevel(level=internal_log_level)
    else:
        raise SystemExit(
            f'Unknown log-level: \'{internal_log_level}\' try using '
            f'{*level_names,}')

    return logger


def _output(config: Config, path: str) -> str:
    path = os.path.join(config.output_dir, path)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return path


def _print_json(data: dict):
    print(json.dumps(data, indent=2, sort_keys=True))


def cmd_codes(args, config: Config) -> int:
    names = [args.code] if args.code else sorted(CODES)
    for name in names:
        code = get_code(name)
        print(f'[[{code.n},{code.k},{distance(code)}]] ({code.name})')
        print('  stabilizers: '
              + ' '.join(g.letters for g in code.stabilizers.generators))
        for index in range(code.k):
            print(f'  logical {index}: X={code.logical_x[index].letters} '
                  f'Z={code.logical_z[index].letters}')
        for action, perm in permutation_table(code).items():
            print(f'  {action}: {list(perm.mapping)}')
    return EXIT_OK


def cmd_gadgets(args, config: Config) -> int:
    if args.action == 'list':
        for name in sorted(GADGETS):
            marker = ' (faults)' if name in SCENARIOS else ''
            print(f'{name}{marker}')
        return EXIT_OK
    circuit = emit_gadget(args.name)
    path = _output(config, args.output)
    write_circuit(path, circuit)
    print(f'{args.name}: {len(circuit.ops)} ops, '
          f'{circuit.two_qubit_gate_count()} two-qubit gates -> {path}')
    return EXIT_OK


def cmd_compile(args, config: Config) -> int:
    circuit = read_circuit(args.input)
    if not isinstance(circuit, LogicalCircuit):
        raise MalformedCircuitError(
            f'{args.input} is not a logical circuit ({SCHEMA_LOGICAL})')
    options = config.schedule_options(catalyst_gamma=args.catalyst_gamma)
    physical = compile_circuit(
        circuit, config.strategy, options, config.capacity)
    path = _output(config, args.output)
    write_circuit(path, physical)
    HARDNESS.set(physical.metadata.hardness)
    report = cost_report(physical, args.epsilon).as_dict()
    _print_json({'schema': SCHEMA_REPORT, 'output': path, **report})
    return EXIT_OK


def cmd_validate(args, config: Config) -> int:
    circuit = read_circuit(args.file)
    if isinstance(circuit, LogicalCircuit):
        print(f'{args.file}: logical circuit with {len(circuit.gates)} gates')
        return EXIT_OK
    violations = validate(circuit)
    for violation in violations:
        print(f'{args.file}: {violation}')
    if violations:
        return EXIT_VALIDATION
    print(f'{args.file}: ok ({len(circuit.ops)} ops)')
    return EXIT_OK


def cmd_run(args, config: Config) -> int:
    circuit = read_circuit(args.file)
    if isinstance(circuit, LogicalCircuit):
        raise MalformedCircuitError(
            f'{args.file} is not a physical circuit ({SCHEMA_PHYSICAL})')
    runner = ShotRunner(
        circuit, config.noise_model, args.shots, config.seed,
        config.capacity, config.workers)
    records = runner.run()
    if args.records:
        write_records(_output(config, args.records), records)
    write_metrics(args.metrics_file)
    accepted = [r for r in records if not r.discarded]
    counts = Counter(''.join(str(b) for b in r.accepted_bits)
                     for r in accepted)
    _print_json({
        'shots': len(records),
        'accepted': len(accepted),
        'yield': len(accepted) / len(records),
        'counts': dict(sorted(counts.items()))})
    return EXIT_OK


def cmd_faults(args, config: Config) -> int:
    report = enumerate_faults(
        args.gadget, range(args.seeds), config.capacity)
    _print_json({
        'gadget': report.gadget, 'sites': report.sites, 'runs': report.runs,
        'discarded': report.discarded,
        'accepted_wrong': report.accepted_wrong,
        'fault_tolerant': report.fault_tolerant})
    for scenario, site, seed in report.failures:
        print(f'{scenario}: {site.pauli} at op {site.location} '
              f'{list(site.qubits)} (seed {seed})')
    return EXIT_OK if report.fault_tolerant else EXIT_VALIDATION


def circuit_seed(seed: int, index: int) -> int:
    state = np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1)
    return int(state[0])


def cmd_bench(args, config: Config) -> int:
    specs = [
        random_mirror_spec(args.width, args.depth, args.hardness,
                           circuit_seed(config.seed, i))
        for i in range(args.circuits)]
    result = estimate(
        specs, args.shots, config.noise_model, config.seed,
        config.strategy, config.schedule_options(), args.oracle,
        config.bootstrap, config.resample_seed, config.workers,
        config.capacity)
    write_result(_output(config, args.output), result)
    if args.csv:
        write_histogram_csv(_output(config, args.csv), result)
    if result.confidence is not None:
        CONFIDENCE.set(result.confidence)
    write_metrics(args.metrics_file)
    print(render_result(result.as_dict()))
    return EXIT_OK


def _fmt(value) -> str:
    if value is None:
        return 'undefined'
    if isinstance(value, float):
        return f'{value:.4f}'
    if isinstance(value, (list, tuple)):
        return '[' + ', '.join(_fmt(v) for v in value) + ']'
    return str(value)


def render_result(data: dict) -> str:
    keys = ['noise', 'shots', 'N_det', 'yield', 'confidence',
            'confidence_interval']
    if data.get('oracle_mode'):
        keys += ['N0', 'N_und', 'oracle_confidence', 'oracle_interval']
    lines = [f'{key:>20}: {_fmt(data.get(key))}' for key in keys]
    lines.append(f'{"histogram":>20}: {_fmt(data.get("histogram", []))}')
    for row in data.get('aggregate', []):
        lines.append(f'{"C(w,d,eta)":>20}: ({row["w"]},{row["d"]},'
                     f'{row["eta"]}) = {_fmt(row["C"])}')
    return '\n'.join(lines)


def cmd_report(args, config: Config) -> int:
    with open(args.file) as f:
        data = json.load(f)
    schema = data.get('schema') if isinstance(data, dict) else None
    if schema == SCHEMA_RESULT:
        print(render_result(data))
        return EXIT_OK
    if schema == SCHEMA_REPORT:
        _print_json(data)
        return EXIT_OK
    circuit = read_circuit(args.file)
    if isinstance(circuit, LogicalCircuit):
        counts = Counter(g.kind.value for g in circuit.gates)
        _print_json({
            'schema': SCHEMA_REPORT, 'w': len(circuit.computational),
            'd': circuit.depth(), 'gates': dict(sorted(counts.items()))})
        if args.reference:
            print(np.array2string(
                logical_unitary(circuit), precision=3, suppress_small=True))
        return EXIT_OK
    _print_json({'schema': SCHEMA_REPORT,
                 **cost_report(circuit).as_dict()})
    return EXIT_OK


COMMANDS = {
    'codes': cmd_codes,
    'gadgets': cmd_gadgets,
    'compile': cmd_compile,
    'validate': cmd_validate,
    'run': cmd_run,
    'faults': cmd_faults,
    'bench': cmd_bench,
    'report': cmd_report,
}


def exit_status(exc: BaseException) -> int:
    if isinstance(exc, FileNotFoundError):
        return EXIT_NOT_FOUND
    if isinstance(exc, CapacityError):
        return EXIT_CAPACITY
    if isinstance(exc, InvalidCircuitError):
        return EXIT_VALIDATION
    if isinstance(exc, (MalformedCircuitError, json.JSONDecodeError,
                        KeyError)):
        return EXIT_SCHEMA
    return EXIT_ERROR


def main(argv: Optional[List[str]] = None):
    args = parse_args(argv)

    # Set up logging
    logger = set_log_level(args.log_level)
    internal_log_level = logging.getLevelName(logger.level)
    external_log_level = logging.getLevelName(logging.root.level)
    logger.info(f'Internal log level: {internal_log_level}')
    logger.info(f'External log level: {external_log_level}')

    try:
        # Read config, flags win over the file
        config = read_config(args.config)
        config = config.replace(
            strategy=getattr(args, 'strategy', None),
            relocation=getattr(args, 'relocation', None),
            corrections=getattr(args, 'corrections', None),
            seed=getattr(args, 'seed', None),
            workers=getattr(args, 'workers', None),
            noise=getattr(args, 'noise', None))
    except FileNotFoundError as exc:
        logger.error(exc)
        logger.critical('Configuration file not found.')
        exit(EXIT_NOT_FOUND)
    except (KeyError, TypeError, ValueError) as exc:
        logger.error(exc)
        logger.critical('Invalid configuration, nothing was run.')
        exit(EXIT_SCHEMA)

    try:
        status = COMMANDS[args.command](args, config)
    except KeyboardInterrupt:
        logger.info('Interrupted by user')
        exit(EXIT_OK)
    except Exception as exc:
        status = exit_status(exc)
        logger.error(exc)
        logger.critical(
            f'Command \'{args.command}\' failed with status {status}.')
        exit(status)
    exit(status)
