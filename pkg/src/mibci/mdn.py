"""Minimum-distance decisions over fixed code rows, plus OVO/OVR composition.

The classifier holds one code vector per class and assigns the label whose
vector is nearest in squared Euclidean distance; its weights are fixed at
construction and never trained. One-versus-one schemes run C(C-1)/2 member
networks, each a binary problem whose two classes map to code rows 1 and 2;
one-versus-rest runs C members scored by the margin between the rest row
and the class row.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .network import NetworkParams, NetworkSpec, forward
from .walsh import WalshCodebook

__all__ = [
    "MdnClassifier",
    "SchemeMember",
    "MetaScheme",
    "mdn_distances",
    "mdn_classify",
    "tally_ovo_votes",
    "ovo_predict",
    "ovr_predict",
    "scheme_predict",
]


@dataclass(frozen=True)
class MdnClassifier:
    """Nearest-code-row decision rule; ties go to the smallest class index."""

    codebook: WalshCodebook

    @property
    def num_classes(self) -> int:
        return self.codebook.num_classes


def mdn_distances(output: np.ndarray, clf: MdnClassifier) -> np.ndarray:
    """Squared Euclidean distance from an output vector to every class row.

    Accepts one ``(M,)`` vector or a ``(n, M)`` batch and returns ``(C,)``
    or ``(n, C)`` distances where column k-1 holds the distance to class k.
    """
    output = np.asarray(output, dtype=np.float64)
    targets = clf.codebook.targets
    if output.shape[-1] != targets.shape[1]:
        raise ValueError(
            f"output length {output.shape[-1]} does not match code size {targets.shape[1]}"
        )
    if output.ndim == 1:
        diff = output[None, :] - targets
        return (diff * diff).sum(axis=1)
    diff = output[:, None, :] - targets[None, :, :]
    return (diff * diff).sum(axis=2)


def mdn_classify(output: np.ndarray, clf: MdnClassifier) -> int | np.ndarray:
    """Label of the nearest class row (argmin of :func:`mdn_distances`)."""
    d = mdn_distances(output, clf)
    if d.ndim == 1:
        return int(d.argmin()) + 1
    return d.argmin(axis=1) + 1


@dataclass(frozen=True)
class SchemeMember:
    """One member network and the original class labels it separates.

    For OVO ``classes`` is the pair (a, b) mapped to binary labels (1, 2);
    for OVR it is ``(c,)`` with class c as binary label 1 and the rest as 2.
    """

    classes: tuple[int, ...]
    spec: NetworkSpec
    params: NetworkParams


@dataclass(frozen=True)
class MetaScheme:
    """A bundle of member networks realizing a multi-class decision."""

    kind: str
    num_classes: int
    members: tuple[SchemeMember, ...]

    def __post_init__(self) -> None:
        c = self.num_classes
        if self.kind == "ovo":
            expected = c * (c - 1) // 2
        elif self.kind == "ovr":
            expected = c
        elif self.kind == "single":
            expected = 1
        else:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if len(self.members) != expected:
            raise ValueError(
                f"{self.kind} over {c} classes needs {expected} member networks, "
                f"got {len(self.members)}"
            )

    def to_json(self) -> str:
        """Bundle every member's network document with its class subset."""
        doc = {
            "kind": self.kind,
            "num_classes": self.num_classes,
            "members": [
                {"classes": list(m.classes), "network": json.loads(m.params.to_json(m.spec))}
                for m in self.members
            ],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "MetaScheme":
        doc = json.loads(text)
        members = []
        for entry in doc["members"]:
            spec, params = NetworkParams.from_json(json.dumps(entry["network"]))
            members.append(SchemeMember(classes=tuple(entry["classes"]), spec=spec, params=params))
        return cls(kind=doc["kind"], num_classes=doc["num_classes"], members=tuple(members))


def _member_output(member: SchemeMember, data: np.ndarray) -> np.ndarray:
    return forward(member.spec, member.params, data, mode="eval")


def tally_ovo_votes(ballots: list[tuple[tuple[int, int], np.ndarray]], num_classes: int) -> int:
    """Resolve pairwise votes given (class pair, two distances) per member.

    Majority wins; vote ties break toward the smallest summed winning
    distance over the members that voted for each tied class, then toward
    the smallest class index.
    """
    votes = np.zeros(num_classes + 1)
    win_distance = np.zeros(num_classes + 1)
    for classes, d in ballots:
        local = int(np.argmin(d))
        winner = classes[local]
        votes[winner] += 1
        win_distance[winner] += d[local]
    best = votes.max()
    tied = [c for c in range(1, num_classes + 1) if votes[c] == best]
    if len(tied) == 1:
        return tied[0]
    return min(tied, key=lambda c: (win_distance[c], c))


def ovo_predict(data: np.ndarray, scheme: MetaScheme, clf2: MdnClassifier) -> int:
    """Majority vote over all pairwise member networks.

    Each member classifies into its two classes through the shared two-class
    decision rule; ties resolve per :func:`tally_ovo_votes`.
    """
    if scheme.kind != "ovo":
        raise ValueError(f"scheme kind is {scheme.kind!r}, expected 'ovo'")
    ballots = []
    for member in scheme.members:
        if len(member.classes) != 2:
            raise ValueError("ovo members must hold exactly two classes")
        ballots.append((member.classes, mdn_distances(_member_output(member, data), clf2)))
    return tally_ovo_votes(ballots, scheme.num_classes)


def ovr_predict(data: np.ndarray, scheme: MetaScheme, clf2: MdnClassifier) -> int:
    """Largest rest-versus-class distance margin over the per-class networks.

    Member c scores D(output, rest row) - D(output, class row); the class
    whose network is most confidently on its own side wins, ties toward the
    smallest index.
    """
    if scheme.kind != "ovr":
        raise ValueError(f"scheme kind is {scheme.kind!r}, expected 'ovr'")
    scores = np.full(scheme.num_classes, -np.inf)
    for member in scheme.members:
        c = member.classes[0]
        d = mdn_distances(_member_output(member, data), clf2)
        scores[c - 1] = d[1] - d[0]
    return int(scores.argmax()) + 1


def scheme_predict(data: np.ndarray, scheme: MetaScheme, clf: MdnClassifier) -> np.ndarray:
    """Batch labels under any scheme kind.

    ``clf`` must match the decision space of the member networks: the
    full C-class rule for a single network, the shared two-class rule for
    OVO/OVR members.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 2:
        data = data[None]
    if scheme.kind == "single":
        member = scheme.members[0]
        out = np.atleast_2d(_member_output(member, data))
        return np.asarray(mdn_classify(out, clf))

    member_distances = [
        (member.classes, mdn_distances(np.atleast_2d(_member_output(member, data)), clf))
        for member in scheme.members
    ]
    n = data.shape[0]
    if scheme.kind == "ovo":
        predictions = np.empty(n, dtype=np.int64)
        for i in range(n):
            ballots = [(classes, d[i]) for classes, d in member_distances]
            predictions[i] = tally_ovo_votes(ballots, scheme.num_classes)
        return predictions
    scores = np.full((n, scheme.num_classes), -np.inf)
    for classes, d in member_distances:
        scores[:, classes[0] - 1] = d[:, 1] - d[:, 0]
    return scores.argmax(axis=1) + 1
