import json

import numpy as np

# Fixed stream ids for the seed splitting scheme; never renumber.
SEED_STREAMS = {
    "probe": 1,
    "analyticity": 2,
    "indicator": 3,
    "pairing-test": 4,
    "noise": 5,
    "density": 6,
    "verify": 7,
}


def rng_for(seed: int, stream: str, *index: int) -> np.random.Generator:
    """
    Independent generator for a named stream derived from one scenario seed.
    Extra `index` entries split the stream further, one child per sweep point.
    """
    spawn_key = (SEED_STREAMS[stream], *(int(i) for i in index))
    sequence = np.random.SeedSequence(int(seed), spawn_key=spawn_key)
    return np.random.default_rng(sequence)


def pairwise_sum(values: np.ndarray) -> complex | float:
    """Fixed-order pairwise sum over the row-major flattening of `values`."""
    flat = np.ascontiguousarray(values).ravel()
    return np.add.reduce(flat)


def parse_complex(value, default: complex = 0j) -> complex:
    """Accepts a complex, a real, an [re, im] pair or a JSON string of either."""
    if value is None:
        return default
    if isinstance(value, complex | int | float):
        return complex(value)
    if isinstance(value, str):
        try:
            value = json.loads(value)
        except (json.JSONDecodeError, TypeError):
            return complex(value.replace(" ", ""))
        return parse_complex(value, default)
    if isinstance(value, list | tuple) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    return default


def complex_pair(value: complex) -> list[float]:
    """JSON-safe [re, im] representation."""
    value = complex(value)
    return [value.real, value.imag]


def frame_for_direction(direction: np.ndarray) -> np.ndarray:
    """
    Deterministic orthonormal rows (nu, mu, e3) with nu and mu perpendicular to
    `direction` and e3 = nu x mu parallel to it.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    # Seed vector: the coordinate axis least aligned with d
    seed = np.zeros(3)
    seed[int(np.argmin(np.abs(d)))] = 1.0
    nu = seed - np.dot(seed, d) * d
    nu /= np.linalg.norm(nu)
    mu = np.cross(d, nu)
    mu /= np.linalg.norm(mu)
    e3 = np.cross(nu, mu)
    return np.vstack([nu, mu, e3])


def fibonacci_directions(count: int) -> np.ndarray:
    """Quasi-uniform unit vectors from the Fibonacci sphere sequence."""
    indices = np.arange(0, count, dtype=float) + 0.5
    polar = np.arccos(1.0 - 2.0 * indices / count)
    azimuth = 2.0 * np.pi * indices / ((1.0 + 5.0**0.5) / 2.0)
    return np.column_stack(
        (
            np.cos(azimuth) * np.sin(polar),
            np.sin(azimuth) * np.sin(polar),
            np.cos(polar),
        )
    )
