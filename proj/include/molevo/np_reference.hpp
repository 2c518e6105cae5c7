#pragma once

/// @file np_reference.hpp
/// @brief Small bundled reference sets for the default natural-product
/// likeness fragment table: natural products vs. synthetic drug-like compounds.

#include <array>
#include <string_view>

namespace molevo {

inline constexpr std::array<std::string_view, 20> kNaturalProductReference = {
    "OC1C(O)C(O)C(CO)OC1O",                          // glucose
    "OCC1OC(O)C(O)C1O",                              // ribofuranose
    "CC(C)=CCCC(C)=CCO",                             // geraniol
    "CC1=CCC(CC1)C(C)=C",                            // limonene
    "CC1(C)C2CCC1(C)C(=O)C2",                        // camphor
    "CC(=O)OC1CC2CCC1(C)C2(C)C",                     // bornyl acetate
    "Oc1ccc(C=CC(=O)O)cc1",                          // p-coumaric acid
    "COc1cc(C=O)ccc1O",                              // vanillin
    "Oc1cc(O)c2c(c1)OC(c1ccc(O)c(O)c1)C(O)C2",       // catechin
    "CC12CCC3C(CCC4CC(O)CCC34C)C1CCC2O",             // androstanediol
    "CC(C)CCCC(C)C1CCC2C1(C)CCC1C2CC=C2CC(O)CCC21C", // cholesterol
    "OC(=O)CC(O)(CC(=O)O)C(=O)O",                    // citric acid
    "CN1CCCC1c1cccnc1",                              // nicotine
    "COc1ccc2[nH]cc(CCN)c2c1",                       // 5-methoxytryptamine
    "NCCc1ccc(O)c(O)c1",                             // dopamine
    "CCCCCC=CCC=CCCCCCCCC(=O)O",                     // linoleic acid
    "CC(C)C1CCC(C)CC1O",                             // menthol
    "OC1CC(O)(CC(O)C1O)C(=O)O",                      // quinic acid
    "CC1=C(C(C)(C)CCC1)C=CC(C)=CC=CC(C)=CCO",        // retinol
    "OCC(O)C1OC(=O)C(O)=C1O",                        // ascorbic acid
};

inline constexpr std::array<std::string_view, 20> kSyntheticReference = {
    "CC(=O)Nc1ccc(O)cc1",                     // paracetamol
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",             // ibuprofen
    "CN1CCN(CC1)c1ccccc1",                    // phenylpiperazine
    "Clc1ccc(cc1)C(c1ccccc1)N1CCNCC1",        // norchlorcyclizine
    "O=C(Nc1ccccc1)c1ccccc1",                 // benzanilide
    "Fc1ccc(cc1)C(=O)CCCN1CCC(O)CC1",         // butyrophenone
    "c1ccc(cc1)Nc1ncccn1",                    // anilinopyrimidine
    "CCN(CC)CCNC(=O)c1ccc(N)cc1",             // procainamide
    "CC(C)NCC(O)COc1cccc2ccccc12",            // propranolol
    "Cc1ccc(cc1)C(=O)Nc1ccc(F)cc1",           // toluanilide
    "N#Cc1ccc(cc1)C(=O)N1CCCC1",              // cyanobenzoyl pyrrolidine
    "OC(=O)Cc1ccccc1Nc1c(Cl)cccc1Cl",         // diclofenac
    "CN(C)CCCN1c2ccccc2CCc2ccccc12",          // imipramine
    "CNCCC(Oc1ccc(cc1)C(F)(F)F)c1ccccc1",     // fluoxetine
    "O=C1CN=C(c2ccccc2)c2cc(Cl)ccc2N1",       // nordazepam
    "CCOC(=O)c1ccc(N)cc1",                    // benzocaine
    "CC(C)(C)NCC(O)c1ccc(O)c(CO)c1",          // salbutamol
    "Clc1ccc(Cl)c(c1)C(=O)Nc1ccccn1",         // dichlorobenzamide
    "COc1ccc(cc1)C(=O)N1CCN(CC1)c1ccccc1F",   // arylpiperazine amide
    "FC(F)(F)c1cccc(c1)N1CCN(CC1)CCc1ccccc1", // trifluoromethylphenylpiperazine
};

} // namespace molevo
