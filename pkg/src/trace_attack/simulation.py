"""Drive one full ride request through steps 0-8 and record the transcript."""

from dataclasses import dataclass
from typing import Dict, Set

from . import protocol as proto
from .quadtree import Point
from .transcript import Transcript


@dataclass
class RideRun:
    transcript: Transcript
    pub: proto.PublicParams
    sec: proto.RsSecret
    en: proto.MaskedQuadtree
    vehicle_masks: Dict[str, proto.MaskedPoint]
    vehicle_leaves: Dict[str, int]
    request: proto.RideRequest
    rider: proto.RiderSecret
    srvs: Set[str]
    region: Set[int]
    crvs: Set[str]
    c5: proto.MaskedPoint
    atp: Point
    atp_leaf: int


def simulate_ride(tree, sp, vehicles, pickup, R, takeoff, rng, mode=proto.SHARED, strict=True):
    """Run RS, one RC and the given RVs (``{id: Point}``) honestly."""
    t = Transcript()
    pub, sec = proto.setup(sp, mode, tree.m, rng, strict=strict)
    t.send(0, "RS", "*", "params", {
        "p": pub.p, "alpha": pub.alpha,
        "k": list(sp.as_tuple()), "coord_bits": sp.coord_bits,
    })

    en = proto.mask_quadtree(tree, pub, sec)
    t.send(1, "RS", "RV,RC", "EN", en.en)

    masks, leaves = {}, {}
    for vid, loc in sorted(vehicles.items()):
        masks[vid], _ = proto.mask_point(en, loc, pub, sp.k4, rng)
        t.send(2, f"RV:{vid}", "RS", "A", masks[vid].a)
        leaves[vid] = proto.identify_quadrant(masks[vid], tree, pub, sec)[-1]

    req, rider = proto.rc_build_request(pickup, R, en, pub, sp, rng)
    t.send(4, "RC", "RS", "request", {
        "C": [c.a for c in req.C], "D": list(req.D), "E": req.E,
        "p_prime": req.p_prime, "alpha_prime": req.alpha_prime,
    })

    srvs, region = proto.rs_select_srvs(req.C, tree, pub, sec, leaves)
    crvs = set()
    for vid in sorted(srvs):
        t.send(5, "RS", f"SRV:{vid}", "forward", {
            "D": list(req.D), "E": req.E,
            "p_prime": req.p_prime, "alpha_prime": req.alpha_prime,
        })
        resp = proto.srv_respond(req.D, req.E, vehicles[vid], req.p_prime, req.alpha_prime, sp.k4, rng)
        t.send(6, f"SRV:{vid}", "RC", "response", {"F": resp.F, "I": resp.I})
        if proto.rc_filter(resp, rider)[1]:
            crvs.add(vid)

    c5, _ = proto.mask_point(en, takeoff, pub, sp.k4, rng)
    t.send(8, "RC", "RS", "takeoff", {"C5": c5.a, "crvs": sorted(crvs)})
    atp, atp_leaf = proto.rs_pick_atp(c5, tree, pub, sec, rng)
    for vid in sorted(crvs):
        t.send(8, "RS", f"CRV:{vid}", "ATP", [atp.x, atp.y])

    return RideRun(t, pub, sec, en, masks, leaves, req, rider, srvs, region, crvs, c5, atp, atp_leaf)
