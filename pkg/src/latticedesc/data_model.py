"""Domain records and corpus I/O.

Defines the semantic-representation schema, per-segment observations, video
records, and the line-delimited JSON corpus format consumed by every other
module. All records are immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import DataError

# Fixed node order of the semantic representation.
NODE_NAMES = ("activity", "tool", "object", "source", "target")
TOPIC_NODE = "topic"
EMPTY_LABEL = "EMPTY"
LEVELS = ("detailed", "short", "single")


@dataclass(frozen=True)
class Schema:
    """State spaces of the five SR nodes plus the topic (dish) list.

    Every node carries the designated EMPTY label as an explicit state.
    ``attribute_dim`` is optional; when present, attribute score vectors are
    validated against it.
    """

    node_states: tuple[tuple[str, ...], ...]  # aligned with NODE_NAMES
    topics: tuple[str, ...]
    attribute_dim: int | None = None

    def __post_init__(self):
        if len(self.node_states) != len(NODE_NAMES):
            raise DataError(f"schema must define exactly {len(NODE_NAMES)} nodes")
        for name, states in zip(NODE_NAMES, self.node_states):
            if not states:
                raise DataError(f"schema node '{name}' has no states")
            if len(set(states)) != len(states):
                raise DataError(f"schema node '{name}' has duplicate states")
            if EMPTY_LABEL not in states:
                raise DataError(f"schema node '{name}' lacks the {EMPTY_LABEL} state")
        if not self.topics:
            raise DataError("schema defines no topics")
        if len(set(self.topics)) != len(self.topics):
            raise DataError("schema has duplicate topics")

    def states(self, node: str) -> tuple[str, ...]:
        if node == TOPIC_NODE:
            return self.topics
        return self.node_states[NODE_NAMES.index(node)]

    def state_index(self, node: str, label: str) -> int:
        try:
            return self.states(node).index(label)
        except ValueError:
            raise DataError(f"unknown label '{label}' for node '{node}'") from None

    def topic_index(self, topic: str) -> int:
        return self.state_index(TOPIC_NODE, topic)

    @property
    def num_topics(self) -> int:
        return len(self.topics)

    def as_dict(self) -> dict:
        d = {
            "nodes": [
                {"name": n, "states": list(s)}
                for n, s in zip(NODE_NAMES, self.node_states)
            ],
            "topics": list(self.topics),
        }
        if self.attribute_dim is not None:
            d["attribute_dim"] = self.attribute_dim
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        nodes = d.get("nodes")
        if not isinstance(nodes, list):
            raise DataError("schema file lacks a 'nodes' list")
        by_name = {}
        for entry in nodes:
            by_name[entry.get("name")] = tuple(entry.get("states", ()))
        missing = [n for n in NODE_NAMES if n not in by_name]
        if missing:
            raise DataError(f"schema file missing nodes: {', '.join(missing)}")
        return cls(
            node_states=tuple(by_name[n] for n in NODE_NAMES),
            topics=tuple(d.get("topics", ())),
            attribute_dim=d.get("attribute_dim"),
        )


@dataclass(frozen=True)
class SemanticRepresentation:
    """The tuple <activity, tool, object, source, target> plus optional topic."""

    activity: str
    tool: str
    object: str
    source: str
    target: str
    topic: str | None = None

    def label(self, node: str) -> str:
        if node == TOPIC_NODE:
            if self.topic is None:
                raise ValueError("SR has no topic assigned")
            return self.topic
        return getattr(self, node)

    def node_labels(self) -> tuple[str, ...]:
        return tuple(getattr(self, n) for n in NODE_NAMES)

    def with_topic(self, topic: str) -> "SemanticRepresentation":
        return replace(self, topic=topic)

    def as_dict(self) -> dict:
        return {n: getattr(self, n) for n in NODE_NAMES}

    @classmethod
    def from_dict(cls, d: dict, topic: str | None = None) -> "SemanticRepresentation":
        missing = [n for n in NODE_NAMES if n not in d]
        if missing:
            raise DataError(f"sr record missing fields: {', '.join(missing)}")
        return cls(**{n: d[n] for n in NODE_NAMES}, topic=topic)


@dataclass(frozen=True)
class SegmentObservation:
    """Per-segment feature bundle.

    ``frames`` is an inclusive-exclusive span in frame units. At least one of
    the two score families must be present: ``attribute_scores`` (one vector
    for the whole segment) or ``node_state_scores`` (one vector per SR node,
    aligned with that node's state list).
    """

    segment_id: str
    frames: tuple[int, int]
    attribute_scores: tuple[float, ...] | None = None
    node_state_scores: dict[str, tuple[float, ...]] | None = None
    sr: SemanticRepresentation | None = None

    @property
    def start(self) -> int:
        return self.frames[0]

    @property
    def end(self) -> int:
        return self.frames[1]

    @property
    def num_frames(self) -> int:
        return self.frames[1] - self.frames[0]


@dataclass(frozen=True)
class VideoRecord:
    """One video: ordered segments, whole-video topic scores, references."""

    video_id: str
    segments: tuple[SegmentObservation, ...]
    topic_scores: tuple[float, ...]
    dish: str | None = None
    sentences: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def references(self, level: str) -> tuple[str, ...]:
        return self.sentences.get(level, ())


@dataclass(frozen=True)
class Dataset:
    schema: Schema
    videos: tuple[VideoRecord, ...]
    split: str = "train"

    def video(self, video_id: str) -> VideoRecord:
        for v in self.videos:
            if v.video_id == video_id:
                return v
        raise DataError(f"video '{video_id}' not in {self.split} dataset")


@dataclass(frozen=True)
class Violation:
    """One invariant breach found by validate_dataset."""

    code: str
    video_id: str | None = None
    segment_id: str | None = None
    field: str | None = None
    message: str = ""

    def __str__(self):
        where = ":".join(x for x in (self.video_id, self.segment_id, self.field) if x)
        return f"{self.code}[{where}] {self.message}"


def parse_schema(path) -> Schema:
    try:
        with open(path, encoding="utf-8") as fh:
            return Schema.from_dict(json.load(fh))
    except OSError as exc:
        raise DataError(f"cannot read schema file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"schema file {path} is not valid JSON: {exc}") from exc


def _tuple_or_none(x):
    return None if x is None else tuple(float(v) for v in x)


def _parse_segment(rec: dict, schema: Schema, video_id: str) -> SegmentObservation:
    seg_id = rec.get("segment_id")
    if not seg_id:
        raise DataError(f"segment record in video '{video_id}' lacks segment_id")
    frames = rec.get("frames")
    if not (isinstance(frames, list) and len(frames) == 2):
        raise DataError(f"segment '{seg_id}': frames must be [start, end]")
    nss = rec.get("node_state_scores")
    if nss is not None:
        nss = {node: tuple(float(v) for v in vec) for node, vec in nss.items()}
    sr = None
    if rec.get("sr") is not None:
        sr = SemanticRepresentation.from_dict(rec["sr"])
    return SegmentObservation(
        segment_id=seg_id,
        frames=(int(frames[0]), int(frames[1])),
        attribute_scores=_tuple_or_none(rec.get("attribute_scores")),
        node_state_scores=nss,
        sr=sr,
    )


def parse_dataset(path, schema_path, split: str = "train") -> Dataset:
    """Read a JSON-lines corpus file and return a fully validated Dataset.

    Records of kind "video" open a new video; kind "segment" records attach to
    the most recently opened video via matching video_id. Any invariant
    violation raises DataError naming the offending record.
    """
    schema = parse_schema(schema_path)
    videos: list[VideoRecord] = []
    cur_id = None
    cur: dict | None = None
    cur_segments: list[SegmentObservation] = []

    def flush():
        if cur is not None:
            videos.append(
                VideoRecord(
                    video_id=cur["video_id"],
                    segments=tuple(cur_segments),
                    topic_scores=cur["topic_scores"],
                    dish=cur["dish"],
                    sentences=cur["sentences"],
                )
            )

    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read dataset file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            kind = rec.get("kind")
            if kind == "video":
                flush()
                cur_id = rec.get("video_id")
                if not cur_id:
                    raise DataError(f"{path}:{lineno}: video record lacks video_id")
                sentences = {
                    level: tuple(rec.get("sentences", {}).get(level, ()))
                    for level in LEVELS
                    if level in rec.get("sentences", {})
                }
                cur = {
                    "video_id": cur_id,
                    "topic_scores": tuple(
                        float(v) for v in rec.get("topic_scores", ())
                    ),
                    "dish": rec.get("dish"),
                    "sentences": sentences,
                }
                cur_segments = []
            elif kind == "segment":
                vid = rec.get("video_id")
                if cur is None or vid != cur_id:
                    raise DataError(
                        f"{path}:{lineno}: segment record for video '{vid}' "
                        "does not follow its video record"
                    )
                cur_segments.append(_parse_segment(rec, schema, vid))
            else:
                raise DataError(f"{path}:{lineno}: unknown record kind {kind!r}")
    flush()

    dataset = Dataset(schema=schema, videos=tuple(videos), split=split)
    violations = validate_dataset(dataset)
    if violations:
        head = "; ".join(str(v) for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        raise DataError(f"dataset {path} invalid: {head}{more}")
    return dataset


def validate_dataset(dataset: Dataset) -> list[Violation]:
    """Check every record invariant; returns [] iff the dataset is clean."""
    schema = dataset.schema
    out: list[Violation] = []
    seen_ids = set()
    attr_dim = schema.attribute_dim

    for video in dataset.videos:
        vid = video.video_id
        if vid in seen_ids:
            out.append(Violation("DUP_VIDEO", vid, message="duplicate video id"))
        seen_ids.add(vid)
        if len(video.topic_scores) != schema.num_topics:
            out.append(
                Violation(
                    "TOPIC_DIM",
                    vid,
                    field="topic_scores",
                    message=f"expected {schema.num_topics} values, "
                    f"got {len(video.topic_scores)}",
                )
            )
        if video.dish is not None and video.dish not in schema.topics:
            out.append(
                Violation("UNKNOWN_LABEL", vid, field="dish", message=video.dish)
            )
        prev = None
        for seg in video.segments:
            sid = seg.segment_id
            if seg.end <= seg.start:
                out.append(
                    Violation("EMPTY_SPAN", vid, sid, "frames", f"{seg.frames}")
                )
            if prev is not None:
                if seg.start <= prev.start:
                    out.append(Violation("ORDER", vid, sid, "frames"))
                if seg.start < prev.end:
                    out.append(Violation("OVERLAP", vid, sid, "frames"))
            prev = seg
            if seg.attribute_scores is None and seg.node_state_scores is None:
                out.append(Violation("NO_SCORES", vid, sid))
            if seg.attribute_scores is not None and attr_dim is not None:
                if len(seg.attribute_scores) != attr_dim:
                    out.append(
                        Violation(
                            "ATTR_DIM",
                            vid,
                            sid,
                            "attribute_scores",
                            f"expected {attr_dim}, got {len(seg.attribute_scores)}",
                        )
                    )
            if seg.node_state_scores is not None:
                for node, vec in seg.node_state_scores.items():
                    if node not in NODE_NAMES:
                        out.append(
                            Violation("UNKNOWN_LABEL", vid, sid, "node_state_scores",
                                      f"unknown node '{node}'")
                        )
                    elif len(vec) != len(schema.states(node)):
                        out.append(
                            Violation(
                                "NODE_DIM",
                                vid,
                                sid,
                                node,
                                f"expected {len(schema.states(node))}, got {len(vec)}",
                            )
                        )
            if seg.sr is not None:
                for node in NODE_NAMES:
                    label = seg.sr.label(node)
                    if label not in schema.states(node):
                        out.append(
                            Violation("UNKNOWN_LABEL", vid, sid, node, label)
                        )
    return out


def serialize_dataset(dataset: Dataset, path) -> None:
    """Inverse of parse_dataset (same JSON-lines layout, one video then its segments)."""
    with open(path, "w", encoding="utf-8") as fh:
        for video in dataset.videos:
            rec = {
                "kind": "video",
                "video_id": video.video_id,
                "topic_scores": list(video.topic_scores),
            }
            if video.dish is not None:
                rec["dish"] = video.dish
            if video.sentences:
                rec["sentences"] = {k: list(v) for k, v in video.sentences.items()}
            fh.write(json.dumps(rec) + "\n")
            for seg in video.segments:
                srec = {
                    "kind": "segment",
                    "video_id": video.video_id,
                    "segment_id": seg.segment_id,
                    "frames": list(seg.frames),
                }
                if seg.attribute_scores is not None:
                    srec["attribute_scores"] = list(seg.attribute_scores)
                if seg.node_state_scores is not None:
                    srec["node_state_scores"] = {
                        node: list(vec) for node, vec in seg.node_state_scores.items()
                    }
                if seg.sr is not None:
                    srec["sr"] = seg.sr.as_dict()
                fh.write(json.dumps(srec) + "\n")


def split_labeled_unlabeled(video: VideoRecord):
    """Partition a video's segments by presence of a gold SR, order preserved."""
    labeled = [s for s in video.segments if s.sr is not None]
    unlabeled = [s for s in video.segments if s.sr is None]
    return labeled, unlabeled
