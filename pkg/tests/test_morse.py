"""Morse spike encoding: element mapping, gap timing, task construction."""

import pytest

from odesa import align_labels
from odesa.morse import (
    DASH_CHANNEL,
    DOT_CHANNEL,
    MORSE_TABLE,
    MorseTaskConfig,
    SONNET_LINES,
    build_morse_task,
    morse_decode,
    morse_encode,
    names_task_config,
    positional_task_config,
    sonnet_task_config,
)


class TestEncode:
    def test_single_dot_letter(self):
        events = morse_encode("E")
        assert len(events) == 1
        assert events[0].channel == DOT_CHANNEL
        assert events[0].time == 0.0

    def test_letter_y_element_pattern(self):
        # Y is dash dot dash dash
        events = morse_encode("Y")
        assert [e.channel for e in events] == [
            DASH_CHANNEL, DOT_CHANNEL, DASH_CHANNEL, DASH_CHANNEL,
        ]

    def test_digit_zero_is_five_dashes(self):
        events = morse_encode("0")
        assert [e.channel for e in events] == [DASH_CHANNEL] * 5

    def test_digit_one_is_dot_then_four_dashes(self):
        events = morse_encode("1")
        assert [e.channel for e in events] == [DOT_CHANNEL] + [DASH_CHANNEL] * 4

    def test_intra_letter_spacing(self):
        events = morse_encode("H")  # four dots
        assert [e.time for e in events] == [0.0, 1.0, 2.0, 3.0]

    def test_letter_gap(self):
        events = morse_encode("EE")
        assert [e.time for e in events] == [0.0, 3.0]

    def test_word_gap(self):
        events = morse_encode("E E")
        assert [e.time for e in events] == [0.0, 7.0]

    def test_multiple_spaces_collapse(self):
        assert morse_encode("E  E") == morse_encode("E E")

    def test_unit_scaling(self):
        events = morse_encode("EE", unit=2.5)
        assert [e.time for e in events] == [0.0, 7.5]

    def test_case_insensitive(self):
        assert morse_encode("sos") == morse_encode("SOS")

    def test_unencodable_character_rejected(self):
        with pytest.raises(ValueError):
            morse_encode("A#B")

    def test_sorted_times(self):
        events = morse_encode("THE QUICK BROWN FOX JUMPS OVER 3 LAZY DOGS 1")
        times = [e.time for e in events]
        assert times == sorted(times)


class TestDecode:
    @pytest.mark.parametrize(
        "text",
        [
            "E",
            "SOS",
            "ANDRE",
            "HELLO WORLD",
            "00100",
            "ABCDEFGHIJKLMNOPQRSTUVWXYZ 0123456789",
        ],
    )
    def test_round_trip(self, text):
        assert morse_decode(morse_encode(text)) == text

    def test_round_trip_with_custom_unit(self):
        events = morse_encode("YESH YING", unit=0.5)
        assert morse_decode(events, unit=0.5) == "YESH YING"

    def test_table_is_invertible(self):
        codes = list(MORSE_TABLE.values())
        assert len(set(codes)) == len(codes)


class TestTasks:
    def test_names_task_shape(self):
        ds = build_morse_task(names_task_config())
        assert ds.n_channels == 2
        assert ds.n_classes == 5
        events, labels = ds.examples[0]
        assert len(labels) == 5
        assert [lab.class_id for lab in labels] == [0, 1, 2, 3, 4]

    def test_labels_sit_on_last_spike_of_each_target(self):
        cfg = names_task_config()
        ds = build_morse_task(cfg)
        events, labels = ds.examples[0]
        # each label time is the time of the final element of its word:
        # decoding the events up to the label must end exactly with the word
        for lab, word in zip(labels, cfg.vocabulary):
            prefix = [e for e in events if e.time <= lab.time]
            assert morse_decode(prefix).endswith(word)
            # and nothing from the word follows the label
            strictly_after = [e for e in events if e.time > lab.time]
            if strictly_after:
                assert strictly_after[0].time >= lab.time + cfg.sequence_gap

    def test_labels_coincide_with_events(self):
        for cfg in (names_task_config(), positional_task_config(), sonnet_task_config()):
            events, labels = build_morse_task(cfg).examples[0]
            align_labels(events, labels)  # raises on violation

    def test_positional_task_two_classes_labeled_at_sequence_end(self):
        ds = build_morse_task(positional_task_config())
        events, labels = ds.examples[0]
        assert ds.n_classes == 2
        assert len(labels) == 2
        # each sequence contributes 25 element spikes (5 digits x 5 elements)
        assert len(events) == 50
        assert labels[0].time == events[24].time
        assert labels[1].time == events[49].time

    def test_sonnet_task_four_lines(self):
        ds = build_morse_task(sonnet_task_config())
        assert ds.n_classes == 4
        events, labels = ds.examples[0]
        assert len(labels) == 4
        decoded = morse_decode(events)
        for line in SONNET_LINES:
            assert line in decoded

    def test_stream_sorted(self):
        events, _ = build_morse_task(sonnet_task_config()).examples[0]
        times = [e.time for e in events]
        assert times == sorted(times)

    def test_empty_vocabulary_rejected(self):
        with pytest.raises(ValueError):
            MorseTaskConfig(vocabulary=[])

    def test_custom_sequence_gap(self):
        cfg = MorseTaskConfig(vocabulary=["E", "E"], sequence_gap=20.0)
        events, _ = build_morse_task(cfg).examples[0]
        assert [e.time for e in events] == [0.0, 20.0]
