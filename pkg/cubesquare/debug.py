import inspect

from . import logger


def debug_shot(circuit, state) -> None:
    function = inspect.currentframe().f_back.f_code.co_name
    fired = []
    for index, op in enumerate(circuit.ops):
        if op.kind.value == 'Detect' and all(
                bit < len(state.record) for bit in op.condition):
            parity = sum(state.record[bit] for bit in op.condition) % 2
            if parity:
                fired.append(f'{index}[{op.tag or "-"}]')
                break
    faults = ', '.join(
        f'{f.pauli}@{f.location}{list(f.qubits)}' for f in state.faults)
    logger.debug(
        f'({function}) {len(state.record)} bits, '
        f'{"discarded at " + fired[0] if fired else "accepted"}, '
        f'faults: {faults or "none"}')


def debug_gadget(builder, start: int, name: str) -> None:
    function = inspect.currentframe().f_back.f_code.co_name
    ops = builder.ops[start:]
    two_qubit = sum(1 for op in ops if op.kind.value in ('CX', 'CZ'))
    logger.debug(
        f'({function}) {name}: {len(ops)} op{"s"[:len(ops)^1]}, '
        f'{two_qubit} two-qubit gate{"s"[:two_qubit^1]}')
