"""Regenerates the frozen test fixtures and the desk-scale corpus.

Requires RDKit; it is used here only as an independent reference and is not a
build or runtime dependency. Outputs are committed, so running this is only
needed when the fixture sets change.
"""
import random
import re
import sys
from pathlib import Path

from rdkit import Chem
from rdkit.Chem import BRICS

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent.parent

CORES = [
    "c1ccc({})cc1", "c1ccc({})nc1", "c1ccc({})cn1", "c1csc({})c1", "c1coc({})c1",
    "c1ccc2cc({})ccc2c1", "C1CCC({})CC1", "C1CCN({})CC1", "C1COCCN1{}",
    "c1ccc2[nH]c({})cc2c1", "c1cnc({})nc1", "C1CC1{}", "c1ccc2occ({})c2c1",
    "O=C1CCC({})N1", "c1cc({})ccc1F", "c1cc({})ccc1Cl", "c1cc({})ccc1OC",
    "Cc1ccc({})cc1", "c1ccc2ncc({})cc2c1", "C1CCC2(CC1)CC({})C2",
]
LINKERS = ["{}", "C{}", "CC{}", "C(=O)N{}", "NC(=O){}", "C(=O)O{}", "OC(=O){}",
           "O{}", "N{}", "S(=O)(=O)N{}", "NC(=O)N{}", "CN{}", "C=C{}", "C#C{}",
           "OCC{}", "N(C){}", "S{}", "C(=O){}"]
TERMINALS = ["C", "CC", "C(C)C", "CF", "C(F)(F)F", "Cl", "F", "OC", "N", "O",
             "C(=O)O", "C(N)=O", "C#N", "[N+](=O)[O-]", "CCO", "c1ccccc1",
             "c1ccncc1", "C1CCCC1", "C1CCOC1", "c1ccsc1"]


def shift_rings(smi, offset):
    return re.sub(r"\d", lambda m: str(int(m.group(0)) + offset), smi)


def canon(smi):
    m = Chem.MolFromSmiles(smi)
    if m is None:
        return None
    if len(Chem.GetMolFrags(m)) != 1:
        return None
    return Chem.MolToSmiles(m)


def make_corpus(n, seed):
    rng = random.Random(seed)
    seen = set()
    out = []
    while len(out) < n:
        core = rng.choice(CORES)
        kind = rng.random()
        if kind < 0.55:
            sub = rng.choice(LINKERS).format(shift_rings(rng.choice(TERMINALS), 4))
        else:
            inner = shift_rings(rng.choice(CORES), 2).format(
                shift_rings(rng.choice(TERMINALS), 4))
            sub = rng.choice(LINKERS).format(inner)
        smi = canon(core.format(sub))
        if smi is None or smi in seen:
            continue
        m = Chem.MolFromSmiles(smi)
        if m.GetNumAtoms() > 40:
            continue
        seen.add(smi)
        out.append(smi)
    return out


def brics_partition(smi):
    m = Chem.MolFromSmiles(smi)
    cut = set()
    for (a, b), (la, lb) in BRICS.FindBRICSBonds(m):
        bond = m.GetBondBetweenAtoms(a, b)
        if bond.GetBondType() != Chem.BondType.SINGLE:
            continue  # olefin (L7) cleavage is not used
        cut.add(bond.GetIdx())
    n = m.GetNumAtoms()
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for b in m.GetBonds():
        if b.GetIdx() in cut:
            continue
        ra, rb = find(b.GetBeginAtomIdx()), find(b.GetEndAtomIdx())
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    parts = sorted(groups.values(), key=lambda g: g[0])
    return sorted(cut), parts


def main():
    corpus = make_corpus(512, 20240917)
    (ROOT / "data" / "desk512.smi").write_text(
        "# desk-scale pre-training corpus (512 molecules, one SMILES per line)\n"
        + "\n".join(corpus) + "\n")

    extra = [
        "CCO", "c1ccccc1", "CCOC(=O)c1ccccc1", "Cc1ccccc1", "CC", "COC(=O)c1ccccc1",
        "CC(=O)Nc1ccc(O)cc1", "CC(=O)Oc1ccccc1C(=O)O", "CN1CCC[C@H]1c1cccnc1",
        "O=C(O)CCc1ccccc1", "c1ccc(-c2ccccc2)cc1", "CCN(CC)CC", "CCS(=O)(=O)NC",
        "O=C1CCCN1C", "CC1(C)CCCCC1", "CCCOCC", "CCCOCCC(=O)c1ccccc1",
        "c1ccc2ccccc2c1", "C1CC1", "c1ccoc1", "c1ccsc1", "c1cc[nH]c1",
        "CC(C)Cc1ccc(C(C)C(=O)O)cc1", "COc1ccc2[nH]cc(CCN)c2c1",
        "CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc21", "O=C(Nc1ccccc1)c1ccccn1",
        "CC(C)NCC(O)COc1cccc2ccccc12", "NS(=O)(=O)c1ccc(N)cc1",
        "OC(c1ccccc1)c1ccccc1", "CSc1ccccc1", "C1CCNCC1", "c1ccc(Oc2ccccc2)cc1",
        "C=CCOc1ccccc1", "N#Cc1ccccc1", "CC(=O)c1ccc(F)cc1", "COC(=O)C1CCCN1",
        "c1ccc(Cn2ccnc2)cc1", "O=C(O)c1ccc(-n2cccc2)cc1", "CN(C)C(=O)c1cccs1",
        "CCOC(=O)N1CCC(C)CC1", "FC(F)(F)c1ccc(OC2CCNCC2)cc1",
        "CC(=O)N1CCN(c2ccccc2)CC1", "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
        "O=C1c2ccccc2C(=O)N1CCCl", "CCCCc1nc2ccccc2[nH]1",
        "COc1cc(C=O)ccc1O", "CC(C)(C)OC(=O)NC(C)C(=O)O", "c1ccc2c(c1)oc1ccccc12",
        "O=C(CCl)Nc1ccc(Br)cc1", "CCN1CCN(C(=O)c2ccc3ccccc3c2)CC1",
    ]
    rows = []
    for smi in extra:
        c = canon(smi)
        cut, parts = brics_partition(c)
        rows.append("%s\t%d\t%s" % (c, len(parts),
                                    ";".join(",".join(map(str, p)) for p in parts)))
    assert len(rows) == 50, len(rows)
    (HERE / "brics50.tsv").write_text(
        "# smiles<TAB>n_fragments<TAB>atom groups (semicolon separated)\n"
        + "\n".join(rows) + "\n")

    rows = []
    for smi in corpus + [canon(s) for s in extra]:
        m = Chem.MolFromSmiles(smi)
        hs = [a.GetTotalNumHs() for a in m.GetAtoms()]
        rings = sorted(len(r) for r in Chem.GetSSSR(m))
        rows.append("%s\t%d\t%d\t%s\t%s" % (
            smi, m.GetNumAtoms(), m.GetNumBonds(),
            ",".join(map(str, hs)), ",".join(map(str, rings))))
    (HERE / "parse_oracle.tsv").write_text(
        "# smiles<TAB>atoms<TAB>bonds<TAB>per-atom total H<TAB>sorted SSSR ring sizes\n"
        + "\n".join(rows) + "\n")


if __name__ == "__main__":
    sys.exit(main())
