#!/usr/bin/env python3
"""Regenerates the committed SMILES fixture corpora under tests/fixtures/.

smiles_verdicts.tsv: 500 strings labeled valid/invalid. Every entry is drawn
from a class whose verdict is unambiguous under any mainstream
cheminformatics toolkit (the reference verdicts follow RDKit's documented
behavior): textbook molecules on the valid side; unmatched parentheses,
unclosed rings, garbage symbols, hard valence violations, malformed
brackets, and broken ring digits on the invalid side. Deliberately excluded
are cases where toolkits differ or sanitization is debatable (kekulization
of exotic rings, hypervalent-but-arguable atoms, bare empty strings).

shuffle_corpus.txt: 50 structurally varied valid molecules used by the
canonicalization permutation-invariance harness.

Both outputs are deterministic; rerunning the script reproduces the
committed files byte for byte.
"""

import os

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, os.pardir, "tests", "fixtures")


def chains():
    out = []
    out += ["C" * n for n in range(1, 14)]
    out += ["C" * n + "O" for n in range(1, 9)]
    out += ["C" * n + "N" for n in range(1, 9)]
    out += ["C" * n + "S" for n in range(1, 5)]
    out += ["CSC", "CCSC", "CCSCC"]
    out += ["COC", "CCOC", "CCOCC", "CCCOCC", "CCCOCCC", "COCCOC"]
    out += ["CF", "CCF", "CCCF", "CCl", "CCCl", "CCCCl",
            "CBr", "CCBr", "CI", "CCI"]
    out += ["OCCO", "OCCCO", "NCCO", "NCCN", "NCCCN"]
    out += ["CNC", "CCNC", "CCNCC"]
    assert len(out) == 60
    return out


def branched():
    out = [
        "CC(C)C", "CC(C)CC", "CC(C)CCC", "CCC(C)CC", "CC(CC)CC",
        "CC(C)(C)C", "CC(C)(C)CC", "CCC(C)(C)CC", "CC(C)C(C)C",
        "CC(C)CC(C)C", "CC(C)(C)C(C)(C)C", "CC(C)(CC)CC",
        "C(C)(C)(C)C", "CC(C)(C)C(C)C", "CCCC(C)CCC", "CCC(CC)CCC",
        "CC(C)CCCC", "CCCC(CC)C", "CC(C)(C)CCC", "CCC(C)C",
        "CC(C)O", "CC(C)N", "CC(C)CO", "CC(C)CN", "CC(C)(C)O",
        "CC(C)(C)N", "OCC(C)C", "NCC(C)C", "OCC(C)(C)C", "NCC(C)(C)C",
        "CC(O)C", "CC(N)C", "CC(O)CC", "CC(N)CC", "CC(C)OC",
        "CC(C)NC", "CC(F)C", "CC(Cl)C", "CC(Br)C", "CC(C)CF",
        "CC(C)CCl", "CC(C)F", "CC(C)Cl", "CC(C)Br", "CC(C)I",
        "OC(C)(C)C", "NC(C)(C)C", "CC(C)(O)CC", "CC(C)(N)CC", "COC(C)C",
    ]
    assert len(out) == 50
    return out


def rings():
    out = [
        "C1CC1", "C1CCC1", "C1CCCC1", "C1CCCCC1", "C1CCCCCC1", "C1CCCCCCC1",
        "CC1CC1", "CC1CCC1", "CC1CCCC1", "CC1CCCCC1",
        "OC1CCCCC1", "NC1CCCCC1", "CC1CCCCC1C", "CC1CCC(C)CC1",
        "C1CCOC1", "C1CCOCC1", "C1CCNC1", "C1CCNCC1",
        "C1CCSC1", "C1COCCN1", "C1COCCO1", "C1CNCCN1",
        "C1CCC2CCCCC2C1", "C1CC2CCC1C2", "C1CCC2(CC1)CCCC2", "C1CC2CC1C2",
        "C%10CCCCC%10", "C%12CCC%12", "C%99CC%99", "CC%10CCCCC%10",
        "C1=CCCCC1", "C1=CC=CC=C1", "C1=CCC1", "C1=CCCC1",
        "O=C1CCCCC1", "C1=CC=CC=C1C",
        "CC1(C)CCCCC1", "C1CCCCC1O", "C1CCCCC1N", "CC1CCCO1",
    ]
    assert len(out) == 40
    return out


def aromatics():
    out = [
        "c1ccccc1", "Cc1ccccc1", "CCc1ccccc1", "Cc1ccccc1C",
        "Cc1ccc(C)cc1", "Cc1cccc(C)c1", "Oc1ccccc1", "COc1ccccc1",
        "Nc1ccccc1", "CNc1ccccc1", "Fc1ccccc1", "Clc1ccccc1",
        "Brc1ccccc1", "Ic1ccccc1", "Oc1ccc(C)cc1", "Nc1ccc(O)cc1",
        "Cc1ccc(Cl)cc1", "OCc1ccccc1", "NCc1ccccc1", "CC(C)c1ccccc1",
        "OC(=O)c1ccccc1", "COC(=O)c1ccccc1", "NC(=O)c1ccccc1",
        "CC(=O)c1ccccc1", "O=Cc1ccccc1", "N#Cc1ccccc1",
        "CC(=O)Nc1ccccc1", "CC(=O)Oc1ccccc1", "OC(=O)c1ccc(C)cc1",
        "O=Cc1ccc(O)cc1",
        "c1ccncc1", "c1cccnc1", "Cc1ccncc1", "Cc1ccccn1",
        "Oc1ccncc1", "Nc1ccncc1", "CCc1ccncc1", "Clc1ccncc1",
        "c1ccoc1", "c1ccsc1", "c1cc[nH]c1", "c1c[nH]cn1", "c1cscn1",
        "c1ocnc1", "Cc1ccco1", "Cc1cccs1", "Cc1ccc[nH]1", "CCc1ccco1",
        "c1ccc2ccccc2c1", "Cc1ccc2ccccc2c1", "c1ccc2ncccc2c1",
        "c1ccc2[nH]ccc2c1", "c1ccc2occc2c1", "c1ccc2sccc2c1",
        "c1ccc(-c2ccccc2)cc1", "C=Cc1ccccc1", "OCCc1ccccc1",
        "NCCc1ccccc1", "Cc1ccccc1O", "CCOc1ccccc1",
    ]
    assert len(out) == 60
    return out


def carbonyls():
    out = [
        "C=C", "CC=C", "CC=CC", "C=CC=C", "CC=CCC",
        "C#C", "CC#C", "CC#CC",
        "C=O", "CC=O", "CCC=O", "CC(=O)C", "CCC(=O)C", "CC(=O)CC",
        "O=C=O", "CC(=O)O", "CCC(=O)O", "OC=O", "OC(=O)C(=O)O",
        "CC(=O)OC", "CC(=O)OCC", "CCOC(=O)C", "COC(=O)C",
        "CC(=O)N", "CC(=O)NC", "CC(=O)NCC", "NC(=O)N", "NC=O",
        "CNC(=O)C", "CC#N", "CCC#N", "N#CC#N", "C#N",
        "COC(=O)OC", "CN(C)C=O", "CC(=O)C(=O)C", "C=CC=O", "C=CC(=O)O",
        "C=CC(=O)OC", "CC=CC=O", "OCC=O", "OCC(=O)O",
        "CSC(=O)C", "O=S(=O)(O)O", "CS(=O)C", "CS(=O)(=O)C",
        "CS(=O)(=O)O", "OP(=O)(O)O", "CP(C)C", "COP(=O)(OC)OC",
    ]
    assert len(out) == 50
    return out


def charged():
    out = [
        "[NH4+]", "[OH-]", "[CH3-]", "[Na+]", "[K+]", "[Li+]",
        "[Cl-]", "[Br-]", "[I-]",
        "[Na+].[Cl-]", "[K+].[Br-]", "[NH4+].[Cl-]", "[Li+].[I-]",
        "C[O-]", "CC[O-]", "CC(=O)[O-]", "CC(=O)[O-].[Na+]",
        "[O-]C(=O)C(=O)[O-]", "C[NH3+]", "CC[NH3+]", "C[NH3+].[Cl-]",
        "C[N+](C)(C)C", "CC[N+](C)(C)C", "C[NH2+]C", "C[NH+](C)C",
        "C[S+](C)C", "C[N+](=O)[O-]", "CC[N+](=O)[O-]",
        "[O-][N+](=O)O", "[O-][N+](=O)c1ccccc1",
        "[O-]S(=O)(=O)[O-]", "[O-]S(=O)(=O)O",
        "[P+](C)(C)(C)C", "C[P+](C)(C)C",
        "[B-](F)(F)(F)F", "F[B-](F)(F)F", "[BH4-]",
        "[Ca+2]", "[Mg+2]", "[Fe+3]",
    ]
    assert len(out) == 40
    return out


def misc():
    out = [
        "[H][H]", "[2H]O[2H]", "[13CH4]", "[12CH4]", "[14CH4]",
        "C[13CH2]C", "[13CH3]CO", "[15NH3]", "[18OH2]", "[35Cl]C",
        "N[C@@H](C)C(=O)O", "N[C@H](C)C(=O)O", "C[C@H](O)CC",
        "C[C@@H](O)CC", "N[C@@H](CC(C)C)C(=O)O", "N[C@@H](CO)C(=O)O",
        "F/C=C/F", "F/C=C\\F", "C/C=C/C", "C/C=C\\C", "CC/C=C/CC",
        "O/N=C/C", "C/C=C/C=C/C", "F/C=C/C=C/F",
        "C%10CC%10", "C%11CCC%11", "C%20CCCC%20", "CC%33CCCC%33C",
        "[CH3:1]C", "[CH2:5](C)C", "C[C:2](C)C",
        "*", "C*C", "*CC", "C(*)C",
        "C1CCCCC1.C1CCCCC1", "CCO.CCO", "O.O", "CC(=O)O.OCC",
        "C1=CC=CC=C1.c1ccccc1",
        "OCC(O)C(O)C(O)C(O)CO", "NCCCCN", "NCCCCCN", "OCCOCCO",
        "CC(C)CC(C)(C)C", "CCCCCCCCCCCCCC", "CCCCCCCCCCCCCCCC",
        "N[C@@H](Cc1ccccc1)C(=O)O", "OC(=O)CCC(=O)O", "CC(=O)CC(=O)C",
    ]
    assert len(out) == 50
    return out


def invalid_parens():
    out = [
        "CC(C", "CC)C", "C(", ")C", "C(C", "C(C(C)", "CC(C)(",
        "((C))(", "C(C))", "C()C", "()", "CC(", "(CC", "(C)C)",
        "C((C)", "C((C))", "C(C)C)", "CC(C)C(", "C)(C", "CC()C",
        "C(()C)", "(", ")", "C((", "C))",
    ]
    assert len(out) == 25
    return out


def invalid_rings():
    out = [
        "C1CC", "C1CCC", "C1", "CC1", "C1CC2CC1", "c1ccccc",
        "C1CCCC", "CC1CCCC", "C12CCC2", "C%10CC", "C1CC%11CC1",
        "CC%10C", "C1CCCCC2", "C2CC", "C3CCC", "CCC1", "CCCC1",
        "c1ccccc1c2cc", "C1OC", "C1NC", "N1CC", "O1CC",
        "C1CC1C2CC", "C%10CCC", "C%25CC",
    ]
    assert len(out) == 25
    return out


def invalid_symbols():
    out = [
        "hello", "smiles", "xyz", "abc123", "C$C", "C&C", "C!C",
        "C?C", "C;C", "C,C", "CXC", "CZC", "C^C", "C~C",
        "C=", "=C", "C#", "#C", "C==C", "C=#C", "C//C",
        "-C", "C-", "1C", "12C", "%10C", "@C", "C@@", "+C", "CH",
    ]
    assert len(out) == 30
    return out


def invalid_valence():
    out = [
        "C(C)(C)(C)(C)C", "CC(C)(C)(C)C", "C(C)(C)(C)(C)O",
        "CC(C)(C)(C)CC", "CCC(C)(C)(C)C", "FC(F)(F)(F)F",
        "ClC(Cl)(Cl)(Cl)Cl", "NC(N)(N)(N)N",
        "O(C)(C)C", "CCO(C)C", "O(C)(C)CC", "OC(=O)(=O)O",
        "N(C)(C)(C)C", "CN(C)(C)C", "CCN(CC)(CC)CC", "CN(=O)=O",
        "N(=O)(=O)C",
        "F(C)C", "Cl(C)C", "Br(C)C", "I(C)C", "CBr(Br)Br",
        "C#O", "CC#O", "N#O", "C=F", "F=F",
        "N=N=N", "O=O=O", "C=O=C", "CC(=O)(=O)C", "CC(=O)(=O)O",
        "C=C(C)(C)C", "C#C(C)C",
        "S(C)(C)(C)(C)(C)(C)C", "P(C)(C)(C)(C)(C)C",
        "[CH5]", "[NH4]", "[OH3]", "[CH4+]",
    ]
    assert len(out) == 40
    return out


def invalid_brackets():
    out = [
        "C[]C", "[C", "C]", "[Zz]", "[Qq]C", "[13]", "[+]", "[-]",
        "[]", "[X]", "[e]", "[123]", "[CH3", "[ C]", "[Cx]",
    ]
    assert len(out) == 15
    return out


def invalid_ring_digits():
    out = [
        "C11", "C11C", "CC11C", "C1C1", "C12CC12", "C123",
        "C%111", "C%%10C", "C%1C", "C%1", "%10", "1", "11",
        "C1CC11", "CC1C1",
    ]
    assert len(out) == 15
    return out


def shuffle_corpus():
    out = [
        "CCO", "CC(C)CO", "CC(C)(C)C", "OCC(O)CO", "NCCO",
        "CC(N)C(=O)O", "CCOC(=O)C", "CC(=O)NC", "CSC", "CCSCC",
        "C1CCCCC1", "C1CCOC1", "C1CCNCC1", "C1COCCO1", "CC1CCCCC1",
        "OC1CCCCC1", "C1CCC2CCCCC2C1", "C1CC2CCC1C2", "C1CCC2(CC1)CCCC2",
        "O=C1CCCCC1",
        "c1ccccc1", "Cc1ccccc1", "Oc1ccccc1", "Nc1ccc(O)cc1",
        "COc1ccccc1", "OC(=O)c1ccccc1", "c1ccncc1", "Cc1ccccn1",
        "c1ccoc1", "c1ccsc1", "c1cc[nH]c1", "c1c[nH]cn1",
        "c1ccc2ccccc2c1", "c1ccc2[nH]ccc2c1", "c1ccc2ncccc2c1",
        "CC(=O)Oc1ccccc1C(=O)O",
        "CC(=O)[O-]", "C[N+](C)(C)C", "[O-][N+](=O)c1ccccc1",
        "[O-]S(=O)(=O)O", "CS(=O)(=O)C", "OP(=O)(O)O",
        "N[C@@H](C)C(=O)O", "F/C=C/F", "[13CH3]CO",
        "N#CC#N", "C=CC(=O)OC", "CN(C)C=O", "OCC(O)C(O)C(O)C(O)CO",
        "N[C@@H](Cc1ccccc1)C(=O)O",
    ]
    assert len(out) == 50
    return out


def main():
    valid = (chains() + branched() + rings() + aromatics() + carbonyls() +
             charged() + misc())
    invalid = (invalid_parens() + invalid_rings() + invalid_symbols() +
               invalid_valence() + invalid_brackets() + invalid_ring_digits())
    assert len(valid) == 350, len(valid)
    assert len(invalid) == 150, len(invalid)

    rows = [("valid", s) for s in valid] + [("invalid", s) for s in invalid]
    seen = set()
    for _, s in rows:
        assert s not in seen, f"duplicate corpus entry: {s!r}"
        seen.add(s)

    os.makedirs(FIXTURES, exist_ok=True)
    with open(os.path.join(FIXTURES, "smiles_verdicts.tsv"), "w") as f:
        f.write("verdict\tsmiles\n")
        for verdict, s in rows:
            assert "\t" not in s and "\n" not in s
            f.write(f"{verdict}\t{s}\n")

    molecules = shuffle_corpus()
    assert len(set(molecules)) == 50
    with open(os.path.join(FIXTURES, "shuffle_corpus.txt"), "w") as f:
        for s in molecules:
            f.write(s + "\n")

    print(f"wrote {len(rows)} verdicts and {len(molecules)} shuffle molecules")


if __name__ == "__main__":
    main()
