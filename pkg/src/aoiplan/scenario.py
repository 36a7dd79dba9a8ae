"""Scenario documents: ground nodes, channel parameters, and UAV limits.

A scenario is the root input for every planner in this package. It is
stored as a small YAML document (``format_version: 1``) so runs can be
reproduced and diffed. Numeric fields round-trip bit-identically through
save/load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import ScenarioError

FORMAT_VERSION = 1

# Defaults mirror the reference evaluation setup: 1 MHz bandwidth, 10 Mbit
# update packets, -100 dBm noise floor, 80 m cruise altitude, 25 m/s per-axis
# speed limit, 900 s mission horizon, 1 km square region.
DEFAULT_REGION = (1000.0, 1000.0)


@dataclass
class Node:
    """A ground sensor that uploads status updates to the UAV."""

    x: float
    y: float
    battery_j: float
    weight: float
    aoi_floor_s: float = 0.0

    def validate(self, index: int) -> None:
        label = f"node {index + 1}"
        for name in ("x", "y", "battery_j", "weight", "aoi_floor_s"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ScenarioError(f"{label}: {name} must be a finite number")
        if self.battery_j <= 0:
            raise ScenarioError(f"{label}: battery_j must be positive")
        if self.weight < 0:
            raise ScenarioError(f"{label}: weight must be nonnegative")
        if self.aoi_floor_s < 0:
            raise ScenarioError(f"{label}: aoi_floor_s must be nonnegative")


@dataclass
class ChannelParams:
    """Uplink channel model parameters."""

    beta0: float = 1e-3
    noise_power_w: float = 1e-13
    packet_bits: float = 10e6
    bandwidth_hz: float = 1e6

    def validate(self) -> None:
        for name in ("beta0", "noise_power_w", "packet_bits", "bandwidth_hz"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise ScenarioError(f"channel: {name} must be a positive finite number")


@dataclass
class UavParams:
    """UAV kinematics and mission horizon."""

    initial: tuple[float, float]
    final: tuple[float, float]
    altitude_m: float = 80.0
    vmax_x: float = 25.0
    vmax_y: float = 25.0
    horizon_s: float = 900.0

    def validate(self) -> None:
        for name in ("altitude_m", "vmax_x", "vmax_y", "horizon_s"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise ScenarioError(f"uav: {name} must be a positive finite number")
        for name in ("initial", "final"):
            point = getattr(self, name)
            if len(point) != 2 or not all(
                isinstance(v, (int, float)) and math.isfinite(v) for v in point
            ):
                raise ScenarioError(f"uav: {name} must be a finite (x, y) pair")
        # The straight run between the endpoints must fit in the horizon,
        # otherwise no trajectory exists at all.
        slack = 1e-9 * max(1.0, self.horizon_s)
        if abs(self.final[0] - self.initial[0]) > self.vmax_x * self.horizon_s + slack:
            raise ScenarioError("uav: final x is unreachable within the horizon")
        if abs(self.final[1] - self.initial[1]) > self.vmax_y * self.horizon_s + slack:
            raise ScenarioError("uav: final y is unreachable within the horizon")


@dataclass
class Scenario:
    """A complete planning instance."""

    nodes: list[Node]
    channel: ChannelParams
    uav: UavParams
    region: tuple[float, float] = DEFAULT_REGION

    def validate(self) -> None:
        if not self.nodes:
            raise ScenarioError("scenario must contain at least one node")
        if len(self.region) != 2 or any(
            not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0
            for v in self.region
        ):
            raise ScenarioError("region must be a pair of positive extents")
        for i, node in enumerate(self.nodes):
            node.validate(i)
        total = sum(node.weight for node in self.nodes)
        if total <= 0:
            raise ScenarioError("node weights must not all be zero")
        self.channel.validate()
        self.uav.validate()

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def weights(self) -> np.ndarray:
        """Importance weights normalized to sum to one."""
        raw = np.array([node.weight for node in self.nodes], dtype=float)
        total = raw.sum()
        if abs(total - 1.0) <= 1e-9:
            return raw
        return raw / total

    def node_xy(self) -> np.ndarray:
        return np.array([[node.x, node.y] for node in self.nodes], dtype=float)

    def batteries(self) -> np.ndarray:
        return np.array([node.battery_j for node in self.nodes], dtype=float)

    def aoi_floors(self) -> np.ndarray:
        return np.array([node.aoi_floor_s for node in self.nodes], dtype=float)

    def coordinate_scale(self) -> float:
        """Length scale used to nondimensionalize positions."""
        spans = [abs(self.region[0]), abs(self.region[1])]
        pts = [self.uav.initial, self.uav.final] + [(n.x, n.y) for n in self.nodes]
        for x, y in pts:
            spans.append(abs(x))
            spans.append(abs(y))
        return max(1.0, max(spans))

    def to_document(self) -> dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "region": [float(self.region[0]), float(self.region[1])],
            "channel": {
                "beta0": float(self.channel.beta0),
                "noise_power_w": float(self.channel.noise_power_w),
                "packet_bits": float(self.channel.packet_bits),
                "bandwidth_hz": float(self.channel.bandwidth_hz),
            },
            "uav": {
                "altitude_m": float(self.uav.altitude_m),
                "vmax_x": float(self.uav.vmax_x),
                "vmax_y": float(self.uav.vmax_y),
                "initial": [float(self.uav.initial[0]), float(self.uav.initial[1])],
                "final": [float(self.uav.final[0]), float(self.uav.final[1])],
                "horizon_s": float(self.uav.horizon_s),
            },
            "nodes": [
                {
                    "x": float(n.x),
                    "y": float(n.y),
                    "battery_j": float(n.battery_j),
                    "weight": float(n.weight),
                    "aoi_floor_s": float(n.aoi_floor_s),
                }
                for n in self.nodes
            ],
        }


def _require(mapping: dict, key: str, where: str) -> Any:
    if not isinstance(mapping, dict) or key not in mapping:
        raise ScenarioError(f"{where}: missing required field '{key}'")
    return mapping[key]


def _number(mapping: dict, key: str, where: str) -> float:
    value = _require(mapping, key, where)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: field '{key}' must be a number")
    return float(value)


def from_document(doc: dict[str, Any]) -> Scenario:
    """Build and validate a Scenario from a parsed document."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    version = _require(doc, "format_version", "document")
    if int(version) != FORMAT_VERSION:
        raise ScenarioError(f"unsupported format_version {version!r}")
    region_raw = _require(doc, "region", "document")
    if not isinstance(region_raw, (list, tuple)) or len(region_raw) != 2:
        raise ScenarioError("region must be a two-element list")
    region = (float(region_raw[0]), float(region_raw[1]))

    ch = _require(doc, "channel", "document")
    channel = ChannelParams(
        beta0=_number(ch, "beta0", "channel"),
        noise_power_w=_number(ch, "noise_power_w", "channel"),
        packet_bits=_number(ch, "packet_bits", "channel"),
        bandwidth_hz=_number(ch, "bandwidth_hz", "channel"),
    )

    uv = _require(doc, "uav", "document")
    initial = _require(uv, "initial", "uav")
    final = _require(uv, "final", "uav")
    if not isinstance(initial, (list, tuple)) or len(initial) != 2:
        raise ScenarioError("uav: initial must be a two-element list")
    if not isinstance(final, (list, tuple)) or len(final) != 2:
        raise ScenarioError("uav: final must be a two-element list")
    uav = UavParams(
        initial=(float(initial[0]), float(initial[1])),
        final=(float(final[0]), float(final[1])),
        altitude_m=_number(uv, "altitude_m", "uav"),
        vmax_x=_number(uv, "vmax_x", "uav"),
        vmax_y=_number(uv, "vmax_y", "uav"),
        horizon_s=_number(uv, "horizon_s", "uav"),
    )

    nodes_raw = _require(doc, "nodes", "document")
    if not isinstance(nodes_raw, list) or not nodes_raw:
        raise ScenarioError("nodes must be a nonempty list")
    nodes = []
    for i, item in enumerate(nodes_raw):
        where = f"node {i + 1}"
        nodes.append(
            Node(
                x=_number(item, "x", where),
                y=_number(item, "y", where),
                battery_j=_number(item, "battery_j", where),
                weight=_number(item, "weight", where),
                aoi_floor_s=float(item.get("aoi_floor_s", 0.0)),
            )
        )

    scenario = Scenario(nodes=nodes, channel=channel, uav=uav, region=region)
    scenario.validate()
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario document from a YAML file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ScenarioError(f"could not parse scenario file: {exc}") from exc
    return from_document(doc)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    """Write a validated scenario to a YAML document."""
    scenario.validate()
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario.to_document(), fh, sort_keys=False)


def generate_scenario(
    num_nodes: int,
    seed: int,
    region: float | tuple[float, float] = DEFAULT_REGION,
    channel: ChannelParams | None = None,
    altitude_m: float = 80.0,
    vmax: float = 25.0,
    horizon_s: float = 900.0,
) -> Scenario:
    """Draw a random instance: uniform node placement, batteries U[0.1, 1] J,
    weights uniform then normalized, uniform random endpoints.

    A scalar region means a square of that side. The draw order below is
    fixed; the same (num_nodes, seed, region) always yields the same
    scenario.
    """
    if num_nodes < 1:
        raise ScenarioError("num_nodes must be at least 1")
    if np.isscalar(region):
        region = (float(region), float(region))
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, region[0], num_nodes)
    ys = rng.uniform(0.0, region[1], num_nodes)
    batteries = rng.uniform(0.1, 1.0, num_nodes)
    raw_w = rng.uniform(0.0, 1.0, num_nodes)
    while raw_w.sum() <= 0:
        raw_w = rng.uniform(0.0, 1.0, num_nodes)
    weights = raw_w / raw_w.sum()
    initial = (float(rng.uniform(0.0, region[0])), float(rng.uniform(0.0, region[1])))
    final = (float(rng.uniform(0.0, region[0])), float(rng.uniform(0.0, region[1])))
    # Redraw the final point if the horizon is too tight to reach it.
    tries = 0
    while (
        abs(final[0] - initial[0]) > vmax * horizon_s
        or abs(final[1] - initial[1]) > vmax * horizon_s
    ):
        final = (float(rng.uniform(0.0, region[0])), float(rng.uniform(0.0, region[1])))
        tries += 1
        if tries > 100:
            final = initial
            break

    nodes = [
        Node(
            x=float(xs[i]),
            y=float(ys[i]),
            battery_j=float(batteries[i]),
            weight=float(weights[i]),
        )
        for i in range(num_nodes)
    ]
    scenario = Scenario(
        nodes=nodes,
        channel=channel if channel is not None else ChannelParams(),
        uav=UavParams(
            initial=initial,
            final=final,
            altitude_m=altitude_m,
            vmax_x=vmax,
            vmax_y=vmax,
            horizon_s=horizon_s,
        ),
        region=region,
    )
    scenario.validate()
    return scenario
