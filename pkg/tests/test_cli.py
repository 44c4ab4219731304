from omgames.cli import corpus_path, main, run_command
from omgames.regions import region_game_text


def _result(text):
    block = text.split("---result---\n", 1)[1].split("---end---", 1)[0]
    return dict(line.split(": ", 1) for line in block.splitlines())


def test_check_figure1():
    code, text = run_command(["check", "fig1"])
    assert code == 0
    assert _result(text)["locations"] == "2"
    assert _result(text)["transitions"] == "1"


def test_check_reports_diagnostics(tmp_path):
    empty = tmp_path / "empty.mgame"
    empty.write_text("")
    code, text = run_command(["check", str(empty)])
    assert code == 2 and "no locations" in text
    dup = tmp_path / "dup.mgame"
    dup.write_text("dim 1\nlocation a goal\naction c controllable\naction c controllable\n")
    code, text = run_command(["check", str(dup)])
    assert code == 2 and "duplicate action c" in text


def test_usage_errors():
    assert run_command(["solve"])[0] == 2
    assert run_command(["solve", "fig1", "--mode", "sideways"])[0] == 2
    assert run_command(["check", "no-such-game.mgame"])[0] == 2


def test_solve_figure1():
    code, text = run_command(["solve", "fig1", "--mode", "partial", "--backend", "abstract"])
    assert code == 0
    assert "rank" in text
    code, text = run_command(["solve", "fig1", "--mode", "partial", "--backend", "direct"])
    assert code == 0 and "y1 <= 5" in text


def test_direct_perfect_on_rect_is_unsupported():
    code, text = run_command(["solve", "rect", "--mode", "perfect", "--backend", "direct"])
    assert code == 2 and text.startswith("error:")


def test_rect_suffix_words():
    code, text = run_command(["words", "rect", "--location", "q1", "--suffix"])
    assert code == 0
    assert "{A,ABA}" in text and "{ABA,ACABA}" in text


def test_figure8_superwords():
    code, text = run_command(["words", "fig8c", "--location", "q1", "--superword"])
    assert code == 0 and "{A}{B,C}{B}{B,C}{C}{B,C}" in text


def test_synthesize_spiral():
    code, text = run_command(["synthesize", "spiral", "--mode", "perfect"])
    assert code == 0 and text.count("strategy mode=perfect") == 1


def test_simulate_spiral_perfect():
    code, text = run_command(["simulate", "spiral", "--mode", "perfect", "--samples", "1000", "--seed", "7",
                              "--adversary", "greedy"])
    assert code == 0
    assert _result(text)["wins"] == "1000"


def test_output_is_deterministic():
    argv = ["simulate", "rect", "--mode", "partial", "--samples", "20", "--seed", "3"]
    assert run_command(argv) == run_command(argv)
    argv = ["words", "timed-square", "--location", "q1", "--suffix"]
    assert run_command(argv) == run_command(argv)


def test_finite_solve_chain():
    code, text = run_command(["finite-solve", str(corpus_path("chain.fgame"))])
    assert code == 0
    assert "s0: losing" in text and "s1: winning, rank 0" in text
    assert _result(text)["winning"] == "1"
    assert _result(text)["oracle_agreement"] == "true"


def test_main_writes_report(capsys):
    assert main(["check", "timed-square"]) == 0
    assert "---result---" in capsys.readouterr().out


def test_shipped_region_game_is_generated():
    assert corpus_path("regions-2clock.mgame").read_text() == region_game_text(2)
