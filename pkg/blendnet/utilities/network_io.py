"""Reading and writing networks, solution reports and sweep results.

Network files are JSON documents checked against `NETWORK_SCHEMA` before a
`Network` is built. Per-edge diameter and friction fall back to the `gas`
section, which falls back to the defaults of `blendnet.utilities.settings`.
"""

import csv
import json
import logging
from pathlib import Path

from jsonschema import Draft7Validator

from blendnet.network_core.errors import DomainError, NetworkDataError
from blendnet.network_core.gas_physics import GasConstants
from blendnet.network_core.network_model import Edge, Network, Node, validate
from blendnet.utilities.settings import load_gas_options

logger = logging.getLogger(__name__)

REPORT_FORMAT = "blendnet-report/1"
GRID_FORMAT = "blendnet-grid/1"

_number = {"type": "number"}
_optional_number = {"type": ["number", "null"]}

NETWORK_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "blendnet network",
    "type": "object",
    "required": ["nodes", "edges"],
    "additionalProperties": False,
    "properties": {
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "load"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "load": _number,
                    "zeta": _optional_number,
                    "pressure_anchor": _optional_number,
                },
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "foot", "head", "length"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "foot": {"type": "string"},
                    "head": {"type": "string"},
                    "length": _number,
                    "diameter": _number,
                    "friction": _number,
                },
            },
        },
        "gas": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sigma2_h2": _number,
                "sigma2_ng": _number,
                "diameter": _number,
                "friction": _number,
            },
        },
    },
}

_validator = Draft7Validator(NETWORK_SCHEMA)

# ------------------------------- Networks ------------------------------------


def network_from_dict(data, strict=True):
    """Build a network from its JSON form.

    Parameters
    ----------
    data : dict
    strict : bool
        Raise on violated network invariants. With False the network is
        returned as is, for `validate` to report on.

    Raises
    ------
    NetworkDataError
        `parse_error` is set when the data does not match the schema.
    """
    errors = sorted(_validator.iter_errors(data), key=lambda e: list(e.path))
    if errors:
        messages = [
            f"{'/'.join(str(p) for p in e.path) or '<root>'}: {e.message}"
            for e in errors
        ]
        raise NetworkDataError(
            "network data does not match the schema: " + "; ".join(messages),
            parse_error=True,
        )

    gas = load_gas_options()
    gas.update(data.get("gas", {}))
    try:
        constants = GasConstants(gas["sigma2_h2"], gas["sigma2_ng"])
    except DomainError as exc:
        raise NetworkDataError(str(exc)) from exc

    nodes = [
        Node(
            n["id"],
            float(n["load"]),
            _optional_float(n.get("zeta")),
            _optional_float(n.get("pressure_anchor")),
        )
        for n in data["nodes"]
    ]
    edges = [
        Edge(
            e["id"],
            e["foot"],
            e["head"],
            float(e["length"]),
            float(e.get("diameter", gas["diameter"])),
            float(e.get("friction", gas["friction"])),
        )
        for e in data["edges"]
    ]
    network = Network(nodes, edges, constants)
    if strict:
        violations = validate(network)
        if violations:
            raise NetworkDataError(
                "invalid network: " + "; ".join(str(v) for v in violations),
                violations=violations,
            )
    return network


def _optional_float(value):
    return None if value is None else float(value)


def network_to_dict(network):
    """JSON form of a network; `network_from_dict` inverts it exactly."""
    nodes = []
    for node in network.nodes:
        entry = {"id": node.id, "load": node.load}
        if node.supply_composition is not None:
            entry["zeta"] = node.supply_composition
        if node.pressure_anchor is not None:
            entry["pressure_anchor"] = node.pressure_anchor
        nodes.append(entry)
    edges = [
        {
            "id": e.id,
            "foot": e.foot,
            "head": e.head,
            "length": e.length,
            "diameter": e.diameter,
            "friction": e.friction,
        }
        for e in network.edges
    ]
    gas = {
        "sigma2_h2": network.gas.sigma2_h2,
        "sigma2_ng": network.gas.sigma2_ng,
    }
    return {"nodes": nodes, "edges": edges, "gas": gas}


def load_network(path, strict=True):
    """Read a network file.

    Raises
    ------
    NetworkDataError
        With `parse_error` set for unreadable JSON (line and column given)
        and schema mismatches.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as network_file:
        text = network_file.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkDataError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", parse_error=True
        ) from exc
    network = network_from_dict(data, strict=strict)
    logger.info("loaded %r from %s", network, path)
    return network


def dump_network(network, path):
    with open(Path(path), "w", encoding="utf-8") as network_file:
        json.dump(network_to_dict(network), network_file, indent=2)
        network_file.write("\n")


# ------------------------------- Results -------------------------------------


def write_json(data, path=None, stream=None):
    """Write `data` as JSON to `path`, or to `stream` when no path is given."""
    text = json.dumps(data, indent=2)
    if path is None:
        stream.write(text + "\n")
        return
    with open(Path(path), "w", encoding="utf-8") as out:
        out.write(text + "\n")


def grid_to_dict(grid):
    return {
        "format": GRID_FORMAT,
        "cut_edge": grid.cut_edge,
        "lambda": grid.lambda_grid.tolist(),
        "mu": grid.mu_grid.tolist(),
        "Hp": _nan_to_none(grid.Hp),
        "Heta": _nan_to_none(grid.Heta),
        "status": grid.status.tolist(),
    }


def write_grid_csv(grid, path):
    """Long-format grid CSV with header lambda,mu,Hp,Heta,status."""
    with open(Path(path), "w", encoding="utf-8", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(["lambda", "mu", "Hp", "Heta", "status"])
        for lam, mu, hp, heta, status in grid.records():
            writer.writerow([_num(lam), _num(mu), _num(hp), _num(heta), status])


def write_curve_csv(
    lambda_samples, values, status, value_name, path=None, stream=None
):
    """Curve CSV with header lambda,<value_name>,status."""
    rows = [
        [_num(lam), _num(value), flag]
        for lam, value, flag in zip(lambda_samples, values, status)
    ]
    if path is None:
        _write_rows(stream, value_name, rows)
        return
    with open(Path(path), "w", encoding="utf-8", newline="") as out:
        _write_rows(out, value_name, rows)


def _write_rows(out, value_name, rows):
    writer = csv.writer(out)
    writer.writerow(["lambda", value_name, "status"])
    writer.writerows(rows)


def _num(value):
    return repr(float(value))


def _nan_to_none(array):
    """Nested lists with NaN replaced by None (JSON null)."""
    return [[None if v != v else float(v) for v in row] for row in array]
