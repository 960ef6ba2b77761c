"""Labels the curated validity list with RDKit (offline; not a build dependency).

Usage: python3 label_validity.py > tests/data/validity_cases.tsv
"""
from rdkit import Chem, RDLogger

RDLogger.DisableLog("rdApp.*")

CASES = """
CCO CC(C)(C)C C=C C#C CC(=O)O
c1ccccc1
c1ccncc1 c1ccoc1 c1ccsc1 c1cc[nH]c1 c1cnc[nH]1 c1ncncn1 c1ccc2ccccc2c1 c1ccc2[nH]ccc2c1
O=C1CCCCC1 C1CC1 C1=CSC=C1 C1=CC=CC=C1 O=C(O)c1ccccc1 CC(=O)Oc1ccccc1C(=O)O
CN1C=NC2=C1C(=O)N(C(=O)N2C)C Cn1cnc2c1c(=O)n(C)c(=O)n2C O=c1cccc[nH]1 O=c1[nH]cccc1
[NH4+] [Na+] [Cl-] [O-]C(=O)C C[N+](C)(C)C [H][H] [2H]C([2H])([2H])[2H] [13CH4] [Cl+] [O] [CH3] [CH2]
CS(=O)(=O)C CS(C)=O OS(=O)(=O)O CP(C)(C)(C)C P(=O)(O)(O)O IC ICl FC(F)(F)F C(Cl)(Cl)(Cl)Cl
N#N O=O O=C=O [C-]#[O+] C[N+](=O)[O-] c1ccc(cc1)[N+](=O)[O-] C=1CC1 C1CC=1
c1ccc1 c1cccccc1 c1ccccccc1 c1ccccccccc1 c1cc1
c1ccc2c(c1)cccc2 c1ccc2c(c1)[nH]c1ccccc12 O=C1NC(=O)c2ccccc21 c1ccc(-c2ccccc2)cc1 c1ccc(cc1)c1ccccc1
CC[C@H](C)O C[C@@H](O)C(=O)O F/C=C/F F/C=C\\F
c1ccc2ccc3ccccc3c2c1 c1cnc2ncnc-2c1 O=C1C=CC(=O)C=C1 c1ccc2c(c1)oc1ccccc12 c1csc(n1)N
CC(C)Cc1ccc(cc1)C(C)C(=O)O CN1CCC[C@H]1c1cccnc1 OC[C@H]1OC(O)[C@H](O)[C@@H](O)[C@@H]1O
C1CC2CCC1C2 C12C3C4C1C5C2C3C45 C%10CCCCC%10 C%12CC%12 [Fe] [Fe+2] [Cu+] [Zn+2] [Si](C)(C)(C)C [SiH4] B(O)(O)O [BH4-] [B-](F)(F)(F)F
c1ccsc1C [se]1cccc1 c1cc[se]c1 c1ccc[n+](C)c1 c1cc[nH+]cc1 c1ccc[n+]([O-])c1 [n+]1ccccc1
C* *C(=O)O c1ccccc1* [*]CC
C(C)(C)(C)(C)C c1cccc1 c1ccnc1 n1cccc1 c1ccccc1=O c1ccccc1c cc C1CC C1CCC1C1 CC(C CC)C C(=O)=O=C
[CH5] [NH5] [OH3] C=C=C=C[C] O(C)(C)C N(C)(C)(C)C FC(F)(F)(F)F Cl(C)C F=C C#C#C C=N#C C=O=C
[C [Xx] [c1ccccc1 C[ CC(C)(C)(C)(C) C1CC1C1 c1ccccc2 c1cccc2c1 C(=)C C== C## CC-(C) C1CC2 C11
c1ccc2ccccc2c CC.O c1cccc1C C1=CC=CC=C1C= c1ccoc1c O=c1ccccc1 c1cccnc1N(C)(C)C [O-2] [NH3+]C(=O)O
[CH4+] [C+](C)(C)(C)C [N+](C)(C)(C)(C)C [O+](C)(C)(C)C [S](C)(C)(C)(C)(C)(C)C S(=O)(=O)(=O)(=O)
cccc c1c c1ccc2c1 c1ncnc1 c1nncc1 [nH]1cccc1C c1cc[o+]cc1 c1ccc(cc1)cc C(C)(C)(C)(C)(C)
B(C)(C)(C)C [BH3] [BH4] F(F)F I(I)I Br(C)C [ClH2] [H]C([H])([H])[H] [H]
C12CCC1CC2 C1CC2CC1C2 c12ccccc1cccc2 c1cc2cccc3ccc(c1)c23 N1C=CC=C1 C1C=CC=C1 c1cc2ccccc2cc1C
CC(=O)[O-].[Na+] c1ccccc1.Cl O=[N+][O-] [N-]=[N+]=N C=[N+]=[N-] CC#N [C-]#N N#[N+][O-]
c1ccc2c(c1)ccc1ccccc12 c1cc2ccc3cccc4ccc(c1)c2c34 O=S1(=O)CCCC1 O=C1CCC(=O)N1 c1ccc2c(c1)C(=O)c1ccccc1C2=O
C(C)(C)(=O)C OC(=O)(O)C C=C(C)(C)C c1ccccc1(C) c1cccc(c1)(C)C [nH]1cnc2ccccc12 n1c[nH]cc1
C1CCCCCCCCCCC1 C1CCCCCCCCCC1C C(C(C(C(C(C(C(C(C(C)))))))))
""".split()


def main():
    seen = set()
    for s in CASES:
        if s in seen:
            continue
        seen.add(s)
        mol = Chem.MolFromSmiles(s)
        print(f"{s}\t{'valid' if mol is not None else 'invalid'}")


if __name__ == "__main__":
    main()
