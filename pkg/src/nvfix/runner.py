"""Dispatch a RunConfig to the engines and assemble the report document."""

from __future__ import annotations

from typing import Any

from . import __version__
from . import geometry as geo
from .config import RunConfig
from .descriptor import NValuedMapDescriptor, Surface, check, covering_analysis, is_split
from .errors import InconsistentPayload, UnsupportedSurface
from .nielsen import (
    SPLIT_FORMULA,
    TORUS_2VALUED_FORMULA,
    NielsenInput,
    classify_homotopy_count,
    nonsplit_section,
    single_map_nielsen,
    split_section,
)
from .numerics import classify_2valued_sphere, classify_rp2, degree_sphere, find_fixed_points
from .torus import TorusTwoValuedMap, nielsen_torus_2valued
from .verify import verify


def descriptor_of(cfg: RunConfig) -> NValuedMapDescriptor:
    d = NValuedMapDescriptor.build(cfg.surface, cfg.n, cfg.sigma, cfg.payload)
    check(d)
    return d


def sphere_coordinates(cfg: RunConfig) -> list:
    if cfg.maps:
        return [geo.parse_catalog_map(m) for m in cfg.maps]
    if cfg.lift:
        f = geo.parse_catalog_map(cfg.lift)
        return [f, geo.antipodal_after(f)]
    raise InconsistentPayload("sphere instances need `maps` or `lift`")


def rp2_coordinates(cfg: RunConfig) -> list:
    if cfg.maps:
        return [geo.parse_catalog_map(m) for m in cfg.maps]
    if cfg.rp2_class:
        return geo.build_rp2_representative(cfg.n, cfg.rp2_class, cfg.grid)
    raise InconsistentPayload("RP2 instances need `class` or `maps`")


def classification(cfg: RunConfig, d: NValuedMapDescriptor) -> dict:
    out: dict[str, Any] = {"split": is_split(d)}
    kind = d.surface.kind
    try:
        out["homotopy_classes"] = {**classify_homotopy_count(d.surface, d.n).to_dict(), "provenance": "formula"}
    except UnsupportedSurface as exc:
        out["homotopy_classes"] = {"unsupported": str(exc)}
    if kind is Surface.SPHERE and (cfg.lift or cfg.maps):
        if cfg.lift and cfg.n == 2:
            f = geo.parse_catalog_map(cfg.lift)
            out["degree"] = {"value": classify_2valued_sphere(f, seed=cfg.seed), "provenance": "scan"}
        else:
            out["coordinate_degrees"] = {
                "values": [degree_sphere(f, seed=cfg.seed) for f in sphere_coordinates(cfg)],
                "provenance": "scan"}
    if kind is Surface.PROJECTIVE_PLANE and (cfg.rp2_class or cfg.maps):
        out["class"] = {"value": classify_rp2(rp2_coordinates(cfg), seed=cfg.seed, grid=None),
                        "provenance": "scan"}
    return out


def nielsen(cfg: RunConfig, d: NValuedMapDescriptor) -> dict:
    kind = d.surface.kind
    if not is_split(d):
        if kind is Surface.TORUS and d.n == 2 and cfg.payload is not None:
            res = nielsen_torus_2valued(d)
            return {"formula_used": TORUS_2VALUED_FORMULA,
                    "terms": [{"index": 1, "N(q,f_i)": abs(res.lefschetz)}],
                    "total": res.nielsen, "provenance": "formula", "torus": res.to_dict()}
        if cfg.per_pair:
            sec = nonsplit_section(NielsenInput(covering_analysis(d, cfg.cap), cfg.per_pair))
            return {**sec.to_dict(), "provenance": "formula"}
        raise InconsistentPayload("non-split instance needs a torus payload or per_pair values")
    if kind is Surface.SPHERE:
        coords = sphere_coordinates(cfg)
        degs = [degree_sphere(f, seed=cfg.seed) for f in coords]
        sec = split_section([single_map_nielsen(d.surface, g) for g in degs])
        return {**sec.to_dict(), "coordinate_degrees": degs, "provenance": "formula (degrees from scan)"}
    if kind in (Surface.PROJECTIVE_PLANE, Surface.DISC):
        return {**split_section([single_map_nielsen(d.surface)] * d.n).to_dict(), "provenance": "formula"}
    if cfg.per_pair:
        missing = [i for i in range(1, d.n + 1) if i not in cfg.per_pair]
        if missing:
            raise InconsistentPayload(f"split instance needs N(f_i) for every i; missing {missing}")
        return {**split_section([cfg.per_pair[i] for i in range(1, d.n + 1)]).to_dict(),
                "provenance": "formula"}
    raise InconsistentPayload("split torus instance needs per_pair coordinate Nielsen numbers")


def scan(cfg: RunConfig, d: NValuedMapDescriptor) -> dict:
    kind = d.surface.kind
    if kind is Surface.SPHERE:
        rep = find_fixed_points(sphere_coordinates(cfg), "sphere", cfg.grid)
    elif kind is Surface.PROJECTIVE_PLANE:
        rep = find_fixed_points(rp2_coordinates(cfg), "rp2", cfg.grid)
    elif kind is Surface.TORUS and cfg.payload is not None and not is_split(d):
        T = TorusTwoValuedMap(d.sigma, cfg.payload)
        rep = find_fixed_points(T, "torus", cfg.grid)
        out = rep.to_dict()
        out["perturbed"] = bool(T.perturbed)
        return out
    else:
        raise UnsupportedSurface(f"no numerical realisation for this {kind.value} instance")
    return rep.to_dict()


def run(cfg: RunConfig) -> dict:
    """Build the report for one configuration (deterministic for a fixed seed)."""
    report: dict[str, Any] = {"tool": {"name": "nvfix", "version": __version__}, "config": cfg.to_dict()}
    if cfg.task == "verify":
        results = verify(cfg.suite, seed=cfg.seed, grid=cfg.grid)
        report["suites"] = [r.to_dict() for r in results]
        report["passed"] = all(r.passed for r in results)
        return report
    d = descriptor_of(cfg)
    report["covering"] = covering_analysis(d, cfg.cap).to_dict()
    if cfg.task == "classify":
        report["classification"] = classification(cfg, d)
    elif cfg.task == "nielsen":
        report["nielsen"] = nielsen(cfg, d)
    elif cfg.task == "scan":
        report["scan"] = scan(cfg, d)
        report["nielsen"] = nielsen(cfg, d)
    return report
