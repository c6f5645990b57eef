"""Real-image dataset manifests.

Manifest file format (line oriented, one record per line):

    id<sep>path<sep>label[<sep>width<sep>height]<sep>class_count=C[<sep>name=...]
    1<sep>images/0001.png<sep>0
    ...

The header row spells out the column names and carries ``key=value``
declarations; the separator (tab or comma) is whichever one splits the
header into the expected columns.  Ids must be dense 1..N in file order
since everything downstream addresses synthetic sequences by (i, j, k).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError

_SEPS = ("\t", ",")
_BASE_COLS = ("id", "path", "label")
_OPT_COLS = ("width", "height")


@dataclass(frozen=True)
class ImageRecord:
    id: int
    path: str
    label: int
    width: int | None = None
    height: int | None = None


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    class_count: int
    records: tuple[ImageRecord, ...]

    def __post_init__(self):
        if not self.records:
            raise ManifestError("empty manifest")
        if self.class_count < 1:
            raise ManifestError(f"class_count must be >= 1, got {self.class_count}")
        seen: set[int] = set()
        for pos, rec in enumerate(self.records, start=1):
            if rec.id in seen:
                raise ManifestError(f"duplicate id {rec.id}")
            seen.add(rec.id)
            if rec.id != pos:
                raise ManifestError(
                    f"non-dense ids: expected id {pos} at position {pos}, got {rec.id}"
                )
            if not 0 <= rec.label < self.class_count:
                raise ManifestError(
                    f"record id {rec.id}: label {rec.label} outside 0..{self.class_count - 1}"
                )

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n(self) -> int:
        return len(self.records)

    def record(self, image_id: int) -> ImageRecord:
        if not 1 <= image_id <= len(self.records):
            raise ManifestError(f"image id {image_id} outside 1..{len(self.records)}")
        return self.records[image_id - 1]

    def label_of(self, image_id: int) -> int:
        return self.record(image_id).label

    def ids_for_class(self, label: int) -> list[int]:
        return [r.id for r in self.records if r.label == label]

    def resolve_path(self, image_id: int, root: str | Path | None = None) -> Path:
        """Record path, joined onto `root` when the stored path is relative."""
        p = Path(self.record(image_id).path)
        if root is not None and not p.is_absolute():
            p = Path(root) / p
        return p


def _detect_separator(header: str) -> str:
    for sep in _SEPS:
        cols = header.split(sep)
        if len(cols) >= 3 and tuple(c.strip() for c in cols[:3]) == _BASE_COLS:
            return sep
    raise ManifestError(
        "header row must start with id/path/label separated by tab or comma"
    )


def load_manifest(path: str | Path) -> DatasetManifest:
    """Parse a manifest file, reporting the offending line on any defect."""
    p = Path(path)
    if not p.is_file():
        raise ManifestError(f"manifest file not found: {p}")
    lines = p.read_text(encoding="utf-8").splitlines()
    body = [(no, ln) for no, ln in enumerate(lines, start=1) if ln.strip()]
    if not body:
        raise ManifestError(f"{p}: empty manifest")

    header_no, header = body[0]
    sep = _detect_separator(header)
    cols = [c.strip() for c in header.split(sep)]
    names = list(_BASE_COLS)
    idx = 3
    for opt in _OPT_COLS:
        if idx < len(cols) and cols[idx] == opt:
            names.append(opt)
            idx += 1
    class_count: int | None = None
    name = p.stem
    for extra in cols[idx:]:
        if "=" not in extra:
            raise ManifestError(f"{p}:{header_no}: unexpected header column {extra!r}")
        key, _, value = extra.partition("=")
        if key == "class_count":
            class_count = int(value)
        elif key == "name":
            name = value
        else:
            raise ManifestError(f"{p}:{header_no}: unknown header key {key!r}")
    if class_count is None:
        raise ManifestError(f"{p}:{header_no}: header must declare class_count=<C>")

    records = []
    for no, ln in body[1:]:
        fields = [f.strip() for f in ln.split(sep)]
        if len(fields) != len(names):
            raise ManifestError(
                f"{p}:{no}: expected {len(names)} fields, got {len(fields)}"
            )
        try:
            rec = ImageRecord(
                id=int(fields[0]),
                path=fields[1],
                label=int(fields[2]),
                width=int(fields[3]) if "width" in names else None,
                height=int(fields[4]) if "height" in names else None,
            )
        except ValueError as e:
            raise ManifestError(f"{p}:{no}: {e}") from e
        records.append(rec)

    try:
        return DatasetManifest(name=name, class_count=class_count, records=tuple(records))
    except ManifestError as e:
        raise ManifestError(f"{p}: {e}") from e


def save_manifest(manifest: DatasetManifest, path: str | Path, sep: str = "\t") -> None:
    if sep not in _SEPS:
        raise ManifestError(f"separator must be tab or comma, got {sep!r}")
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    has_size = all(r.width is not None and r.height is not None for r in manifest.records)
    cols = list(_BASE_COLS) + (list(_OPT_COLS) if has_size else [])
    header = sep.join(cols + [f"class_count={manifest.class_count}", f"name={manifest.name}"])
    out = [header]
    for r in manifest.records:
        fields = [str(r.id), r.path, str(r.label)]
        if has_size:
            fields += [str(r.width), str(r.height)]
        out.append(sep.join(fields))
    p.write_text("\n".join(out) + "\n", encoding="utf-8")
