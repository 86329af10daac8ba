"""Sinc positional embedding for coordinate inputs."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SincPeConfig:
    """``num_centers`` equidistant centres on ``domain`` (endpoints included).

    ``width`` divides the distance inside the sinc; the default puts
    neighbouring centres at each other's first zero.
    """

    num_centers: int
    domain: tuple = (0.0, 1.0)
    width: float | None = None

    def __post_init__(self):
        if self.num_centers < 2:
            raise ValueError("num_centers must be >= 2")
        a, b = (float(v) for v in self.domain)
        if not b > a:
            raise ValueError("domain must be a non-empty interval")
        object.__setattr__(self, "domain", (a, b))
        if self.width is None:
            object.__setattr__(self, "width", (b - a) / (self.num_centers - 1))
        elif not self.width > 0:
            raise ValueError("width must be positive")

    @property
    def centers(self):
        a, b = self.domain
        return np.linspace(a, b, self.num_centers)

    def to_json(self):
        return json.dumps({"N": self.num_centers, "domain": list(self.domain), "width": self.width})

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(int(data["N"]), tuple(data["domain"]), data.get("width"))


def sinc_embed_1d(x, cfg):
    """``[sinc(|t_i - x| / width)]_i``; shape ``x.shape + (N,)``."""
    x = np.asarray(x, dtype=float)
    return np.sinc(np.abs(cfg.centers - x[..., None]) / cfg.width)


def sinc_embed_2d(x1, x2, cfg):
    """Concatenation of the 1-D embeddings of each coordinate, length ``2N``."""
    return np.concatenate([sinc_embed_1d(x1, cfg), sinc_embed_1d(x2, cfg)], axis=-1)


def embed_coordinates(coords, cfg):
    """Embed an ``(M, 2)`` coordinate table into an ``(M, 2N)`` design table."""
    coords = np.asarray(coords, dtype=float)
    return sinc_embed_2d(coords[:, 0], coords[:, 1], cfg)
