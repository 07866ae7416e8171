"""Validates captured stream messages, event-log records, scenarios and configs against docs/*.schema.json."""

import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

SRC = Path(os.environ["LUNATRACK_SOURCE_DIR"])
EMIT = os.environ["LUNATRACK_EMIT"]


def schema(name):
    s = json.loads((SRC / "docs" / name).read_text())
    jsonschema.Draft202012Validator.check_schema(s)
    return jsonschema.Draft202012Validator(s)


def lines(path):
    return [json.loads(l) for l in Path(path).read_text().splitlines() if l.strip()]


class SchemaTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = Path(cls.tmp.name)
        subprocess.run([EMIT, cls.dir], check=True, capture_output=True, timeout=300)
        cls.protocol = schema("protocol.schema.json")

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def assert_valid(self, validator, doc):
        errors = sorted(validator.iter_errors(doc), key=str)
        self.assertFalse(errors, f"{doc}: {[e.message for e in errors]}")

    def test_every_stream_message(self):
        messages = lines(self.dir / "stream.jsonl")
        kinds = {m["kind"] for m in messages}
        self.assertEqual(kinds, {"config", "snapshot", "detection", "tracker", "alert", "status", "diagnostic"})
        for m in messages:
            self.assert_valid(self.protocol, m)
        self.assertTrue(any(m["kind"] == "tracker" and "from" in m for m in messages))
        diag_types = {m["type"] for m in messages if m["kind"] == "diagnostic"}
        self.assertIn("malformed_inbound", diag_types)
        self.assertIn("persistent_sink_down", diag_types)

    def test_event_log_records(self):
        log_schema = schema("event_log.schema.json")
        to_message_kind = {"diagnostics": "diagnostic"}
        files = sorted(self.dir.glob("events_*.jsonl"))
        self.assertEqual(len(files), 2)
        for f in files:
            for r in lines(f):
                self.assert_valid(log_schema, r)
                message = {"kind": to_message_kind.get(r["kind"], r["kind"]), "t": r["t"], **r["payload"]}
                self.assert_valid(self.protocol, message)

    def test_inbound_steering(self):
        for doc in ({"kind": "subject", "x": 0.2, "y": 1.0}, {"kind": "subject", "absent": True},
                    {"kind": "subject", "x": 0, "y": 1, "absent": False}):
            self.assert_valid(self.protocol, doc)
        for doc in ({"kind": "subject", "x": 1}, {"kind": "subject", "absent": False},
                    {"kind": "subject", "x": "1", "y": 1}, {"kind": "unknown"}):
            self.assertFalse(self.protocol.is_valid(doc), doc)

    def test_scenarios(self):
        v = schema("scenario.schema.json")
        files = sorted((SRC / "scenarios").glob("*.json"))
        self.assertGreaterEqual(len(files), 6)
        for f in files:
            self.assert_valid(v, json.loads(f.read_text()))

    def test_platform_config(self):
        v = schema("config.schema.json")
        self.assert_valid(v, json.loads((SRC / "configs" / "platform.json").read_text()))
        self.assertFalse(v.is_valid({"lens": {"R": "fifty"}}))


if __name__ == "__main__":
    unittest.main(argv=[sys.argv[0], "-v"])
