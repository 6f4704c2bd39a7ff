"""International Morse code as a two-channel spike stream.

Channel 0 carries dots, channel 1 carries dashes. One spike is emitted per
element at its onset; onsets inside a letter advance by the intra-letter
gap, letters by the inter-letter gap and words by the inter-word gap
(defaults 1 / 3 / 7 units, the standard ratios).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ContractError
from .events import Event, LabeledEvent
from .spike_io import SpikeDataset, quantize_time

DOT_CHANNEL = 0
DASH_CHANNEL = 1

MORSE_TABLE = {
    "A": ".-", "B": "-...", "C": "-.-.", "D": "-..", "E": ".", "F": "..-.",
    "G": "--.", "H": "....", "I": "..", "J": ".---", "K": "-.-", "L": ".-..",
    "M": "--", "N": "-.", "O": "---", "P": ".--.", "Q": "--.-", "R": ".-.",
    "S": "...", "T": "-", "U": "..-", "V": "...-", "W": ".--", "X": "-..-",
    "Y": "-.--", "Z": "--..",
    "0": "-----", "1": ".----", "2": "..---", "3": "...--", "4": "....-",
    "5": ".....", "6": "-....", "7": "--...", "8": "---..", "9": "----.",
}

REVERSE_TABLE = {code: char for char, code in MORSE_TABLE.items()}


@dataclass
class MorseTaskConfig:
    """A stream of target strings, one class per target, labeled at each
    target's final spike. Gaps are in multiples of ``unit``."""

    vocabulary: list[str]
    unit: float = 1.0
    intra_letter_gap: float = 1.0
    inter_letter_gap: float = 3.0
    inter_word_gap: float = 7.0
    sequence_gap: float | None = None  # between targets; defaults to inter_word_gap

    def __post_init__(self):
        if not self.vocabulary:
            raise ValueError("vocabulary must not be empty")
        if self.unit <= 0:
            raise ValueError("unit must be positive")
        for gap in (self.intra_letter_gap, self.inter_letter_gap, self.inter_word_gap):
            if gap <= 0:
                raise ValueError("gaps must be strictly positive")
        if self.sequence_gap is None:
            self.sequence_gap = self.inter_word_gap


def morse_encode(
    text: str,
    unit: float = 1.0,
    intra_letter_gap: float = 1.0,
    inter_letter_gap: float = 3.0,
    inter_word_gap: float = 7.0,
    t0: float = 0.0,
) -> list[Event]:
    """Encode ``text`` (A-Z, 0-9 and spaces; case-insensitive) as spikes.

    Runs of spaces collapse into a single word gap.
    """
    events: list[Event] = []
    t = t0
    pending = 0.0  # gap to apply before the next letter's first element
    for ch in text.upper():
        if ch == " ":
            pending = inter_word_gap * unit
            continue
        code = MORSE_TABLE.get(ch)
        if code is None:
            raise ValueError(f"character {ch!r} has no Morse encoding")
        if events:
            t += pending
        for i, element in enumerate(code):
            if i > 0:
                t += intra_letter_gap * unit
            channel = DOT_CHANNEL if element == "." else DASH_CHANNEL
            events.append(Event(channel, quantize_time(t)))
        pending = inter_letter_gap * unit
    return events


def morse_decode(
    events,
    unit: float = 1.0,
    intra_letter_gap: float = 1.0,
    inter_letter_gap: float = 3.0,
    inter_word_gap: float = 7.0,
) -> str:
    """Recover text from an encoded stream by classifying the inter-spike
    gaps. Unknown element groups decode as ``?``."""
    letter_cut = (intra_letter_gap + inter_letter_gap) / 2 * unit
    word_cut = (inter_letter_gap + inter_word_gap) / 2 * unit
    out: list[str] = []
    code = ""
    prev_t = None
    for e in events:
        if prev_t is not None:
            gap = e.time - prev_t
            if gap > word_cut:
                out.append(REVERSE_TABLE.get(code, "?"))
                out.append(" ")
                code = ""
            elif gap > letter_cut:
                out.append(REVERSE_TABLE.get(code, "?"))
                code = ""
        code += "." if e.channel == DOT_CHANNEL else "-"
        prev_t = e.time
    if code:
        out.append(REVERSE_TABLE.get(code, "?"))
    return "".join(out)


def build_morse_task(cfg: MorseTaskConfig) -> SpikeDataset:
    """Concatenate the vocabulary into one continuous stream with a class
    label at the last spike of each target occurrence."""
    events: list[Event] = []
    labels: list[LabeledEvent] = []
    t = 0.0
    for class_id, target in enumerate(cfg.vocabulary):
        chunk = morse_encode(
            target,
            unit=cfg.unit,
            intra_letter_gap=cfg.intra_letter_gap,
            inter_letter_gap=cfg.inter_letter_gap,
            inter_word_gap=cfg.inter_word_gap,
            t0=t,
        )
        if not chunk:
            raise ContractError(f"target {target!r} encodes to an empty stream")
        events.extend(chunk)
        labels.append(LabeledEvent(class_id, chunk[-1].time))
        t = chunk[-1].time + cfg.sequence_gap * cfg.unit
    return SpikeDataset(
        n_channels=2, n_classes=len(cfg.vocabulary), examples=[(events, labels)]
    )


def names_task_config() -> MorseTaskConfig:
    return MorseTaskConfig(vocabulary=["ANDRE", "GREG", "SAEED", "YESH", "YING"])


def positional_task_config() -> MorseTaskConfig:
    return MorseTaskConfig(vocabulary=["00100", "00010"])


SONNET_LINES = [
    "SHALL I COMPARE THEE TO A SUMMERS DAY",
    "THOU ART MORE LOVELY AND MORE TEMPERATE",
    "ROUGH WINDS DO SHAKE THE DARLING BUDS OF MAY",
    "AND SUMMERS LEASE HATH ALL TOO SHORT A DATE",
]


def sonnet_task_config() -> MorseTaskConfig:
    return MorseTaskConfig(vocabulary=list(SONNET_LINES))
