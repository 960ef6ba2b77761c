#include "lmol/smiles/elements.hpp"

#include <array>
#include <string>

#include "lmol/error.hpp"

namespace lmol::smiles {
namespace {

// Standard atomic weights and default valence lists (common cheminformatics
// conventions; transition metals and other elements without a fixed list are
// unrestricted).
constexpr int kV1[] = {1};
constexpr int kV2[] = {0};
constexpr int kV4[] = {2};
constexpr int kV5[] = {3};
constexpr int kV6[] = {4};
constexpr int kV7[] = {3};
constexpr int kV8[] = {2};
constexpr int kV9[] = {1};
constexpr int kV10[] = {0};
constexpr int kV13[] = {3};
constexpr int kV14[] = {4};
constexpr int kV15[] = {3, 5};
constexpr int kV16[] = {2, 4, 6};
constexpr int kV17[] = {1};
constexpr int kV18[] = {0};
constexpr int kV31[] = {3};
constexpr int kV32[] = {4};
constexpr int kV33[] = {3, 5};
constexpr int kV34[] = {2, 4, 6};
constexpr int kV35[] = {1};
constexpr int kV36[] = {0};
constexpr int kV49[] = {3};
constexpr int kV50[] = {2, 4};
constexpr int kV51[] = {3, 5};
constexpr int kV52[] = {2, 4, 6};
constexpr int kV53[] = {1, 3, 5};
constexpr int kV54[] = {0, 2, 4, 6};
constexpr int kV55[] = {1};
constexpr int kV82[] = {2, 4};
constexpr int kV83[] = {3, 5};
constexpr int kV84[] = {2, 4, 6};
constexpr int kV85[] = {1, 3, 5};
constexpr int kV86[] = {0};
constexpr int kV87[] = {1};

const ElementInfo kElements[] = {
    {0, "*", 0.0, {}},
    {1, "H", 1.008, kV1},
    {2, "He", 4.003, kV2},
    {3, "Li", 6.941, {}},
    {4, "Be", 9.012, kV4},
    {5, "B", 10.812, kV5},
    {6, "C", 12.011, kV6},
    {7, "N", 14.007, kV7},
    {8, "O", 15.999, kV8},
    {9, "F", 18.998, kV9},
    {10, "Ne", 20.18, kV10},
    {11, "Na", 22.99, {}},
    {12, "Mg", 24.305, {}},
    {13, "Al", 26.982, kV13},
    {14, "Si", 28.086, kV14},
    {15, "P", 30.974, kV15},
    {16, "S", 32.067, kV16},
    {17, "Cl", 35.453, kV17},
    {18, "Ar", 39.948, kV18},
    {19, "K", 39.098, {}},
    {20, "Ca", 40.078, {}},
    {21, "Sc", 44.956, {}},
    {22, "Ti", 47.867, {}},
    {23, "V", 50.944, {}},
    {24, "Cr", 51.996, {}},
    {25, "Mn", 54.938, {}},
    {26, "Fe", 55.845, {}},
    {27, "Co", 58.933, {}},
    {28, "Ni", 58.693, {}},
    {29, "Cu", 63.546, {}},
    {30, "Zn", 65.39, {}},
    {31, "Ga", 69.723, kV31},
    {32, "Ge", 72.61, kV32},
    {33, "As", 74.922, kV33},
    {34, "Se", 78.96, kV34},
    {35, "Br", 79.904, kV35},
    {36, "Kr", 83.8, kV36},
    {37, "Rb", 85.468, {}},
    {38, "Sr", 87.62, {}},
    {39, "Y", 88.906, {}},
    {40, "Zr", 91.224, {}},
    {41, "Nb", 92.906, {}},
    {42, "Mo", 95.94, {}},
    {43, "Tc", 98.0, {}},
    {44, "Ru", 101.07, {}},
    {45, "Rh", 102.906, {}},
    {46, "Pd", 106.42, {}},
    {47, "Ag", 107.868, {}},
    {48, "Cd", 112.412, {}},
    {49, "In", 114.818, kV49},
    {50, "Sn", 118.711, kV50},
    {51, "Sb", 121.76, kV51},
    {52, "Te", 127.6, kV52},
    {53, "I", 126.904, kV53},
    {54, "Xe", 131.29, kV54},
    {55, "Cs", 132.905, kV55},
    {56, "Ba", 137.328, {}},
    {57, "La", 138.906, {}},
    {58, "Ce", 140.116, {}},
    {59, "Pr", 140.908, {}},
    {60, "Nd", 144.24, {}},
    {61, "Pm", 145.0, {}},
    {62, "Sm", 150.36, {}},
    {63, "Eu", 151.964, {}},
    {64, "Gd", 157.25, {}},
    {65, "Tb", 158.925, {}},
    {66, "Dy", 162.5, {}},
    {67, "Ho", 164.93, {}},
    {68, "Er", 167.26, {}},
    {69, "Tm", 168.934, {}},
    {70, "Yb", 173.04, {}},
    {71, "Lu", 174.967, {}},
    {72, "Hf", 178.49, {}},
    {73, "Ta", 180.948, {}},
    {74, "W", 183.84, {}},
    {75, "Re", 186.207, {}},
    {76, "Os", 190.23, {}},
    {77, "Ir", 192.217, {}},
    {78, "Pt", 195.078, {}},
    {79, "Au", 196.967, {}},
    {80, "Hg", 200.59, {}},
    {81, "Tl", 204.383, {}},
    {82, "Pb", 207.2, kV82},
    {83, "Bi", 208.98, kV83},
    {84, "Po", 209.0, kV84},
    {85, "At", 210.0, kV85},
    {86, "Rn", 222.0, kV86},
    {87, "Fr", 223.0, kV87},
    {88, "Ra", 226.0, {}},
    {89, "Ac", 227.0, {}},
    {90, "Th", 232.038, {}},
    {91, "Pa", 231.036, {}},
    {92, "U", 238.029, {}},
    {93, "Np", 237.0, {}},
    {94, "Pu", 244.0, {}},
    {95, "Am", 243.0, {}},
    {96, "Cm", 247.0, {}},
    {97, "Bk", 247.0, {}},
    {98, "Cf", 251.0, {}},
    {99, "Es", 252.0, {}},
    {100, "Fm", 257.0, {}},
    {101, "Md", 258.0, {}},
    {102, "No", 259.0, {}},
    {103, "Lr", 262.0, {}},
    {104, "Rf", 267.0, {}},
    {105, "Db", 268.0, {}},
    {106, "Sg", 269.0, {}},
    {107, "Bh", 270.0, {}},
    {108, "Hs", 269.0, {}},
    {109, "Mt", 278.0, {}},
    {110, "Ds", 281.0, {}},
    {111, "Rg", 281.0, {}},
    {112, "Cn", 285.0, {}},
    {113, "Nh", 284.0, {}},
    {114, "Fl", 289.0, {}},
    {115, "Mc", 288.0, {}},
    {116, "Lv", 293.0, {}},
    {117, "Ts", 292.0, {}},
    {118, "Og", 294.0, {}},
};

}  // namespace

const ElementInfo& element(int atomic_number) {
  if (atomic_number < 0 || atomic_number > 118) {
    throw IndexError("no element with atomic number " + std::to_string(atomic_number));
  }
  return kElements[atomic_number];
}

std::optional<int> atomic_number(std::string_view symbol) {
  for (const ElementInfo& e : kElements) {
    if (e.symbol == symbol) return e.atomic_number;
  }
  return std::nullopt;
}

}  // namespace lmol::smiles
