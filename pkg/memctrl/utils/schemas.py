# File: memctrl/utils/schemas.py

"""JSON schema every results.json must satisfy."""

RESULTS_SCHEMA = {
    '$schema': 'https://json-schema.org/draft/2020-12/schema',
    'type': 'object',
    'required': [
        'experiment', 'passed', 'summary', 'parameters', 'versions',
        'tolerances', 'verdicts', 'artifacts', 'timestamp',
    ],
    'properties': {
        'experiment': {'enum': ['steer', 'regularity', 'riesz', 'zeta-convergence']},
        'passed': {'type': 'boolean'},
        'summary': {'type': 'object'},
        'parameters': {'type': 'object'},
        'versions': {
            'type': 'object',
            'required': ['memctrl', 'numpy', 'scipy'],
            'additionalProperties': {'type': 'string'},
        },
        'tolerances': {'type': 'object', 'additionalProperties': {'type': 'number'}},
        'verdicts': {'type': 'object', 'additionalProperties': {'type': ['string', 'boolean', 'number']}},
        'artifacts': {'type': 'array', 'items': {'type': 'string'}},
        'timestamp': {'type': 'string'},
    },
    'additionalProperties': False,
}
