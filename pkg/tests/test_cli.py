import json

from salift.cli import EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_encode_lnp3(capsys, tmp_path):
    code, out, _ = run(capsys, "encode", "--principle", "lnp", "--encoding", "unary", "--n", "3")
    assert code == EXIT_OK
    header = next(l for l in out.splitlines() if l.startswith("p cnf"))
    assert header.split()[3] == "42"


def test_rank_from_file(capsys, tmp_path):
    f = tmp_path / "lnp_u_3.cnf"
    assert main(["encode", "--principle", "lnp", "--n", "3", "-o", str(f)]) == EXIT_OK
    capsys.readouterr()
    code, out, _ = run(capsys, "--json", "rank", "--cnf", str(f), "--rmax", "3")
    assert code == EXIT_OK
    assert json.loads(out)["rank"] == 1


def test_rank_certificate_round_trip(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    code, _, _ = run(capsys, "rank", "--principle", "php", "--n", "2", "--rmax", "2",
                     "--certificate", str(cert))
    assert code == EXIT_OK
    code, out, _ = run(capsys, "verify-cert", "--cert", str(cert), "--principle", "php", "--n", "2")
    assert code == EXIT_OK and out.startswith("accepted")


def test_verify_php_sos(capsys):
    code, out, _ = run(capsys, "verify-cert", "--gen", "php-sos", "--m", "5", "--n", "4", "--json")
    assert code == EXIT_OK and json.loads(out)["accepted"] is True


def test_tampered_certificate_rejected(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    run(capsys, "rank", "--principle", "lnp", "--n", "2", "--rmax", "1", "--certificate", str(cert))
    data = json.loads(cert.read_text())
    data["entries"] = data["entries"][1:]
    cert.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify-cert", "--cert", str(cert), "--principle", "lnp", "--n", "2")
    assert code == EXIT_NEGATIVE and out.startswith("rejected")


def test_usage_errors(capsys):
    code, _, err = run(capsys, "rank", "--rmax", "2")
    assert code == EXIT_USAGE and "error" in err
    code, out, _ = run(capsys, "--json", "verify-cert")
    assert code == EXIT_USAGE and "error" in json.loads(out)
    code, _, _ = run(capsys, "no-such-command")
    assert code == EXIT_USAGE


def test_check_valuation_and_psd(capsys):
    code, out, _ = run(capsys, "check-valuation", "--backend", "permutation", "--principle", "lnp",
                       "--n", "5", "--rank", "0", "--degree", "1", "--json")
    assert code == EXIT_OK and json.loads(out)["violations"] == []
    code, out, _ = run(capsys, "psd", "--valuation", "permutation", "--n", "3", "--json")
    assert code == EXIT_OK and json.loads(out)["psd"] is True


def test_check_valuation_reports_violations(capsys):
    code, out, _ = run(capsys, "check-valuation", "--backend", "permutation", "--principle", "lnp",
                       "--n", "4", "--rank", "2", "--limit", "1")
    assert code == EXIT_NEGATIVE and "violations 1" in out


def test_restrict_is_byte_identical(capsys, tmp_path):
    argv = ["restrict", "--n", "16", "--trials", "3000", "--seed", "7", "--width", "8"]
    a = run(capsys, *argv)
    b = run(capsys, *argv, "--jobs", "2")
    assert a[0] == EXIT_OK and a[1] == b[1]
    csv = tmp_path / "s.csv"
    run(capsys, *argv, "--csv", str(csv))
    assert csv.read_text().startswith("statistic,count,trials,frequency")


def test_lift_writes_jsonl(capsys, tmp_path):
    out = tmp_path / "sys.jsonl"
    code, text, _ = run(capsys, "lift", "--principle", "php", "--n", "2", "--rank", "1", "-o", str(out))
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert str(len(lines)) in text
    assert {"relation", "provenance", "form"} <= set(json.loads(lines[0]))
