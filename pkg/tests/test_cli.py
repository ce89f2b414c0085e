import subprocess
import sys

import pytest

from unitrace import Letter, build_shuffle_automaton, build_sync_product, flatten_system, parse_automaton, parse_system, sync_letter
from unitrace import Rng, cli
from unitrace.cli import EXIT_INPUT, EXIT_MODEL, EXIT_SYNTAX, EXIT_USAGE, EXIT_VALIDATION, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def body(out):
    return [line for line in out.splitlines() if not line.startswith("#")]


def test_count_sync_example(capsys, model_path):
    code, out, _ = run(capsys, "count", model_path("xay.rm"), "--length", 2, "--sync", "alpha")
    assert code == 0
    assert body(out)[0] == "count=8"
    assert "sync=alpha" in out.splitlines()[0]


def test_count_prints_asymptotics(capsys, model_path):
    code, out, _ = run(capsys, "count", model_path("planted.rm"), "-n", 5)
    assert code == 0
    assert any(line.startswith("module=m omega=") for line in body(out))


def test_sample_is_reproducible(capsys, model_path):
    args = ("sample", model_path("counters.rm"), "--length", 5, "--count", 3, "--seed", 7)
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second and first[0] == 0
    assert len(body(first[1])) == 3
    assert "seed=7" in first[1]


def test_unseeded_run_echoes_seed(capsys, model_path):
    code, out, _ = run(capsys, "sample", model_path("counters.rm"), "-n", 3)
    seed = int(out.split("seed=")[1].split()[0])
    again = run(capsys, "sample", model_path("counters.rm"), "-n", 3, "--seed", seed)[1]
    assert body(again) == body(out)


def _replay(automata, displays, alpha=None):
    """Walk the automata by display names; each display must pick exactly one enabled letter."""
    current = [a.initial for a in automata]
    for name in displays:
        moved = False
        for i, a in enumerate(automata):
            for letter, dst in a.out[current[i]]:
                if letter.display == name and letter != alpha:
                    current[i] = dst
                    moved = True
        if alpha is not None and name == alpha.display:
            for i, a in enumerate(automata):
                current[i] = a.step(current[i], alpha)
                assert current[i] is not None
            moved = True
        assert moved, name
    return all(q in a.finals for a, q in zip(automata, current))


@pytest.mark.parametrize("model,sync", [("counters.rm", None), ("xay.rm", "alpha"), ("planted.rm", None)])
def test_sample_round_trip(capsys, model_path, model, sync):
    argv = ["sample", model_path(model), "-n", 6, "-m", 40, "--seed", 1]
    if sync:
        argv += ["--sync", sync]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    system = parse_system(open(model_path(model)).read())
    automata = flatten_system(system, sync)
    alpha = sync_letter(sync) if sync else None
    for line in body(out):
        displays = line.split()
        assert len(displays) == 6
        assert _replay(automata, displays, alpha)


def test_estimate_header(capsys, model_path):
    code, out, _ = run(
        capsys, "estimate", model_path("planted.rm"), "--epsilon", 0.1, "--delta", 0.05, "-k", 3,
        "--detect", "v=3", "--seed", 4,
    )
    assert code == 0
    lines = body(out)
    assert lines[0] == "N=185"
    assert lines[1].startswith("k=3 estimate=")
    assert lines[-1] == "seed=4"


def test_estimate_iterate(capsys, model_path):
    code, out, _ = run(capsys, "estimate", model_path("planted.rm"), "--detect", "v=3", "--iterate", 3, 6, "--seed", 1)
    assert code == 0 and sum(line.startswith("k=") for line in body(out)) >= 1


def test_estimate_with_sync_labels(capsys, model_path):
    code, out, _ = run(capsys, "estimate", model_path("tictac.rm"), "--detect", "state1>=4", "-k", 4, "--seed", 2)
    assert code == 0
    assert "estimate=1.000000" in out


def test_validate_kv(capsys, model_path):
    code, out, _ = run(capsys, "validate", model_path("xay.rm"), "-n", 3, "-m", 5000, "--sync", "alpha",
                       "--seed", 3, "--format", "kv")
    report = dict(line.split("=", 1) for line in body(out))
    assert code == 0 and report["pass"] == "True" and report["support"] == "20"


def test_flatten_output_parses(capsys, model_path):
    code, out, _ = run(capsys, "flatten", model_path("xay.rm"), "--sync", "alpha")
    assert code == 0
    chunks = out.split("# module ")[1:]
    assert len(chunks) == 2
    for chunk in chunks:
        a = parse_automaton(chunk.split("\n", 1)[1])
        assert a.n_states == 2 and Letter("alpha") in a.alphabet


def test_product_output(capsys, model_path):
    code, out, _ = run(capsys, "product", model_path("counters.rm"))
    system = parse_system(open(model_path("counters.rm")).read())
    expected = build_shuffle_automaton(flatten_system(system)).base
    a = parse_automaton(out)
    assert code == 0 and a.n_states == expected.n_states and set(a.transitions) == set(expected.transitions)
    code, out, _ = run(capsys, "product", model_path("xay.rm"), "--sync", "alpha")
    sync = build_sync_product(flatten_system(parse_system(open(model_path("xay.rm")).read()), "alpha"), sync_letter("alpha"))
    assert parse_automaton(out).n_states == sync.base.n_states


def test_two_sync_labels_is_usage_error(capsys, model_path):
    code, _, err = run(capsys, "count", model_path("tictac.rm"), "-n", 2, "--sync", "tic", "--sync", "tac")
    assert code == EXIT_USAGE and "at most one" in err


def test_unknown_flag(capsys, model_path):
    assert run(capsys, "count", model_path("xay.rm"), "-n", 2, "--bogus")[0] == EXIT_USAGE


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "count", tmp_path / "nope.rm", "-n", 2)
    assert code == EXIT_INPUT and "cannot read" in err


def test_syntax_error(capsys, tmp_path):
    bad = tmp_path / "bad.rm"
    bad.write_text("module m v : [0..1] init 0; [] v=0 -> ; endmodule")
    code, _, err = run(capsys, "count", bad, "-n", 2)
    assert code == EXIT_SYNTAX and "line 1" in err


def test_labels_need_a_decision(capsys, model_path):
    code, _, err = run(capsys, "count", model_path("tictac.rm"), "-n", 2)
    assert code == EXIT_MODEL and "--strip-sync" in err


def test_multiple_alpha_edges_is_model_error(capsys, model_path):
    # on_tic flattens to 501 tic transitions, and the timer also uses tac.
    assert run(capsys, "count", model_path("tictac.rm"), "-n", 2, "--sync", "tic")[0] == EXIT_MODEL


def test_too_few_samples_is_precondition_error(capsys, model_path):
    code, _, err = run(capsys, "validate", model_path("counters.rm"), "-n", 6, "-m", 100, "--seed", 0)
    assert code == EXIT_MODEL and "too few" in err


def test_biased_sampler_fails_validation(capsys, model_path, monkeypatch):
    original = cli._Pipeline.draw

    def stuck(self, sampler, n, rng):
        # Always the first trace of a fixed seed: a maximally biased sampler.
        return original(self, sampler, n, Rng(0))

    monkeypatch.setattr(cli._Pipeline, "draw", stuck)
    code, out, _ = run(capsys, "validate", model_path("xay.rm"), "-n", 3, "-m", 500, "--sync", "alpha",
                       "--seed", 0, "--format", "kv")
    assert code == EXIT_VALIDATION and "pass=False" in out


def test_help_documents_exit_codes():
    out = subprocess.run([sys.executable, "-m", "unitrace.cli", "--help"], capture_output=True, text=True).stdout
    for code in ("0", "2", "3", "4", "5", "6"):
        assert f"  {code}  " in out


def test_output_file(capsys, model_path, tmp_path):
    target = tmp_path / "out.txt"
    code, out, _ = run(capsys, "count", model_path("xay.rm"), "-n", 2, "--sync", "alpha", "-o", target)
    assert code == 0 and out == ""
    assert "count=8" in target.read_text()
