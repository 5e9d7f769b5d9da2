import logging

logger = logging.getLogger('cubesquare')

# Environment variable that points to the JSON configuration file
CONFIG_ENV = 'CUBESQUARE_CONFIG'

# Largest number of simultaneously active qubits the dense simulator accepts
DEFAULT_CAPACITY = 26

# Numerical tolerances used by the simulator and the verification oracles
NORM_TOLERANCE = 1e-10
BRANCH_TOLERANCE = 1e-12

# Schema identifiers written into every structured-text document
SCHEMA_PHYSICAL = 'cubesquare.physical/1'
SCHEMA_LOGICAL = 'cubesquare.logical/1'
SCHEMA_RESULT = 'cubesquare.result/1'
SCHEMA_REPORT = 'cubesquare.report/1'

# Ancilla layout strategies, see compiler.allocate
STRATEGIES = ['sequential', 'mid', 'fast']

# Exit status per failure class of the command line interface
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_NOT_FOUND = 3
EXIT_SCHEMA = 4
EXIT_CAPACITY = 5
EXIT_VALIDATION = 6

__all__ = [
    logger, CONFIG_ENV, DEFAULT_CAPACITY, NORM_TOLERANCE, BRANCH_TOLERANCE,
    SCHEMA_PHYSICAL, SCHEMA_LOGICAL, SCHEMA_RESULT, SCHEMA_REPORT, STRATEGIES,
    EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_NOT_FOUND, EXIT_SCHEMA,
    EXIT_CAPACITY, EXIT_VALIDATION]
