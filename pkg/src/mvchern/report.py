"""Per-N reports comparing the computed classes with the published closed forms."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from .chern import ClassVector, printed_pushforward
from .mather import affine_count_polynomial, ed_polynomial, printed_mather, run_pipeline

_VECTOR_FIELDS = ("pushforward", "mather")


@dataclass
class EDReport:
    N: int
    pushforward: ClassVector
    pushforward_printed: ClassVector
    mather: ClassVector
    mather_printed: ClassVector
    polar_degrees: Tuple[int, int, int, int]
    ed_degree: int
    p: int
    q: int
    eu_obstruction: int
    self_intersection: int
    seconds: Optional[float] = field(default=None, compare=False)

    @property
    def pushforward_diff(self) -> ClassVector:
        return self.pushforward - self.pushforward_printed

    @property
    def mather_diff(self) -> ClassVector:
        return self.mather - self.mather_printed

    @property
    def match(self) -> bool:
        return self.ed_degree == self.p

    def first_mismatch(self) -> Optional[str]:
        """Name of the first field that disagrees with its expected value."""
        if sum(self.polar_degrees) != self.ed_degree:
            return "polarDegrees"
        if self.ed_degree != self.p:
            return "edDegree"
        return None

    def to_dict(self, timings: bool = False) -> Dict:
        out = {"N": self.N}
        for name in _VECTOR_FIELDS:
            faithful = getattr(self, name)
            printed = getattr(self, name + "_printed")
            out[name] = {
                "faithful": faithful.to_dict(),
                "printed": printed.to_dict(),
                "diff": (faithful - printed).to_dict(),
            }
        out.update(
            polarDegrees=list(self.polar_degrees),
            edDegree=self.ed_degree,
            p=self.p,
            q=self.q,
            match=self.match,
            euObstruction=self.eu_obstruction,
            selfIntersection=self.self_intersection,
        )
        if timings and self.seconds is not None:
            out["seconds"] = round(self.seconds, 6)
        return out

    @classmethod
    def from_dict(cls, d: Dict) -> "EDReport":
        def vec(x):
            return ClassVector(**{k: int(v) for k, v in x.items()})

        return cls(
            N=int(d["N"]),
            pushforward=vec(d["pushforward"]["faithful"]),
            pushforward_printed=vec(d["pushforward"]["printed"]),
            mather=vec(d["mather"]["faithful"]),
            mather_printed=vec(d["mather"]["printed"]),
            polar_degrees=tuple(int(x) for x in d["polarDegrees"]),
            ed_degree=int(d["edDegree"]),
            p=int(d["p"]),
            q=int(d["q"]),
            eu_obstruction=int(d["euObstruction"]),
            self_intersection=int(d["selfIntersection"]),
            seconds=d.get("seconds"),
        )

    def to_row(self, timings: bool = False) -> Dict[str, object]:
        """Flat record for CSV: a_j are pushforward entries, cM_j Mather entries."""
        row: Dict[str, object] = {"N": self.N}
        for prefix, name in (("a", "pushforward"), ("cM", "mather")):
            faithful = getattr(self, name)
            printed = getattr(self, name + "_printed")
            diff = faithful - printed
            for j in range(4):
                row[f"{prefix}{j}"] = faithful[j]
                row[f"{prefix}{j}_printed"] = printed[j]
                row[f"{prefix}{j}_diff"] = diff[j]
        for k, d in enumerate(self.polar_degrees):
            row[f"delta{k}"] = d
        row.update(
            edDegree=self.ed_degree,
            p=self.p,
            q=self.q,
            match=self.match,
            euObstruction=self.eu_obstruction,
            selfIntersection=self.self_intersection,
        )
        if timings and self.seconds is not None:
            row["seconds"] = round(self.seconds, 6)
        return row

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> "EDReport":
        def vec(prefix, suffix=""):
            return ClassVector(*(int(row[f"{prefix}{j}{suffix}"]) for j in range(4)))

        seconds = row.get("seconds")
        return cls(
            N=int(row["N"]),
            pushforward=vec("a"),
            pushforward_printed=vec("a", "_printed"),
            mather=vec("cM"),
            mather_printed=vec("cM", "_printed"),
            polar_degrees=tuple(int(row[f"delta{k}"]) for k in range(4)),
            ed_degree=int(row["edDegree"]),
            p=int(row["p"]),
            q=int(row["q"]),
            eu_obstruction=int(row["euObstruction"]),
            self_intersection=int(row["selfIntersection"]),
            seconds=float(seconds) if seconds else None,
        )

    def to_text(self) -> str:
        pd = self.pushforward_diff
        return "\n".join(
            [
                f"N = {self.N}",
                f"  pushforward   {self.pushforward.as_tuple()}  printed {self.pushforward_printed.as_tuple()}"
                f"  diff {pd.as_tuple()}",
                f"  Chern-Mather  {self.mather.as_tuple()}  printed {self.mather_printed.as_tuple()}"
                f"  diff {self.mather_diff.as_tuple()}",
                f"  Eu = {self.eu_obstruction}, E.E = {self.self_intersection}",
                f"  polar degrees {self.polar_degrees}",
                f"  ED degree {self.ed_degree}  p(N) = {self.p}  q(N) = {self.q}  "
                + ("OK" if self.match else "MISMATCH"),
            ]
        )


def build_report(N: int) -> EDReport:
    start = time.perf_counter()
    result = run_pipeline(N)
    return EDReport(
        N=N,
        pushforward=result.pushforward,
        pushforward_printed=printed_pushforward(N),
        mather=result.matherClass,
        mather_printed=printed_mather(N),
        polar_degrees=result.polarDegrees,
        ed_degree=result.edDegree,
        p=ed_polynomial(N),
        q=affine_count_polynomial(N),
        eu_obstruction=result.euObstruction,
        self_intersection=result.selfIntersection,
        seconds=time.perf_counter() - start,
    )


def to_json_lines(reports: Iterable[EDReport], timings: bool = False) -> str:
    return "".join(json.dumps(r.to_dict(timings)) + "\n" for r in reports)


def to_csv(reports: Iterable[EDReport], timings: bool = False) -> str:
    rows = [r.to_row(timings) for r in reports]
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\r\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def to_text(reports: Iterable[EDReport]) -> str:
    return "".join(r.to_text() + "\n" for r in reports)


def parse_json_lines(text: str) -> List[EDReport]:
    return [EDReport.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def parse_csv(text: str) -> List[EDReport]:
    return [EDReport.from_row(row) for row in csv.DictReader(io.StringIO(text))]


def render(reports: List[EDReport], fmt: str, timings: bool = False) -> str:
    if fmt == "json":
        return to_json_lines(reports, timings)
    if fmt == "csv":
        return to_csv(reports, timings)
    return to_text(reports)
