"""Reference molecular weights and ring counts from RDKit (offline oracle).

Usage: python3 label_descriptors.py > tests/data/descriptor_cases.tsv
"""
from rdkit import Chem
from rdkit.Chem import Descriptors

CASES = """
CCO C [H][H] c1ccccc1 C1CC1C1CC1 CC(=O)Oc1ccccc1C(=O)O Cn1cnc2c1c(=O)n(C)c(=O)n2C
c1ccc2ccccc2c1 O=c1cccc[nH]1 [NH4+] C[N+](=O)[O-] FC(F)(F)F ClC(Cl)Cl BrCCBr IC
OS(=O)(=O)O P(=O)(O)(O)O c1ccsc1 CC(C)Cc1ccc(cc1)C(C)C(=O)O C12C3C4C1C5C2C3C45 [Si](C)(C)(C)C
B(O)(O)O CN1CCC[C@H]1c1cccnc1 OC[C@H]1OC(O)[C@H](O)[C@@H](O)[C@@H]1O c1cc2ccc3cccc4ccc(c1)c2c34
""".split()


def main():
    for s in CASES:
        m = Chem.MolFromSmiles(s)
        ring = m.GetNumBonds() - m.GetNumAtoms() + len(Chem.GetMolFrags(m))
        print(f"{s}\t{Descriptors.MolWt(m):.4f}\t{m.GetNumHeavyAtoms()}\t{ring}")


if __name__ == "__main__":
    main()
