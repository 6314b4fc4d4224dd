import filecmp
import os
import string
import subprocess
import sys
import tempfile


def script_env():
    """Environment that makes `lib/` importable by the scripts under test."""
    env = dict(os.environ)
    env["PYTHONPATH"] = "./lib" + (":" + env["PYTHONPATH"] if "PYTHONPATH" in env else "")
    return env


def run_script(script, *args):
    """Run `script` with this interpreter; returns the CompletedProcess."""
    return subprocess.run(
        [sys.executable, script, *args], capture_output=True, text=True, env=script_env(), check=False
    )


class TestFile:
    def __init__(self, text=None, filename=None):
        assert text is None or filename is None, "Cannot specify both text and filename for input"
        self.text = text
        self.filename = filename
        self.tempfile = filename is None
        if self.tempfile:
            fd, self.filename = tempfile.mkstemp()
            with os.fdopen(fd, "w") as f:
                for line in text.splitlines():
                    print(line.lstrip(" "), file=f)

    def check(self, other_fname):
        assert filecmp.cmp(self.filename, other_fname, shallow=False), (
            f"Files do not match ({self.filename}, {other_fname})"
        )

    def __del__(self):
        if self.tempfile and os.path.exists(self.filename):
            os.remove(self.filename)


class BaseScriptTest:
    """
    Helper class for testing a command line tool.

    `command_line` is a `string.Template`; every `input_NAME` and
    `output_NAME` attribute (a `TestFile`) binds `${NAME}` to a file name.
    `stdin`, `stdout` and `stderr` are wired to the process streams. Outputs
    are compared with the expected files once the command exits with
    `exit_status`.
    """

    exit_status = 0

    def test_script(self):
        inputs = {}
        outputs = {}
        for key in dir(self):
            if key.startswith("input_"):
                inputs[key[len("input_") :]] = getattr(self, key)
            elif key.startswith("output_"):
                outputs[key[len("output_") :]] = getattr(self, key)
        with tempfile.TemporaryDirectory() as tmp:
            fnames = {key: value.filename for key, value in inputs.items()}
            for key in outputs:
                fnames[key] = os.path.join(tmp, key)
            streams = {}
            if "stdin" in inputs:
                streams["stdin"] = open(fnames["stdin"])
            for key in ("stdout", "stderr"):
                if key in outputs:
                    streams[key] = open(fnames[key], "w")
            command = string.Template(self.command_line).substitute(fnames)
            try:
                status = subprocess.call(command, shell=True, env=script_env(), **streams)
            finally:
                for stream in streams.values():
                    stream.close()
            assert status == self.exit_status, f"'{command}' exited with {status}, expected {self.exit_status}"
            for key, value in outputs.items():
                value.check(fnames[key])
