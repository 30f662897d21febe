// Shared test inputs: the running example and small helpers.

#pragma once

#include <string>

#include "tgdlog/model.hpp"
#include "tgdlog/parser.hpp"

namespace tgdlog::test {

inline const char* kFig1Tgds =
    "R1(X,Y) -> exists Z: R4(X,Y,Z).\n"
    "R2(Y,Z) -> exists X: R4(X,Y,Z).\n"
    "R3(X,Z) -> exists Y: R4(X,Y,Z).\n"
    "R4(X1,Y1,Z1), R4(X2,Y2,Z2) -> R5(X1,Z2).\n";

inline const char* kFig1Query = "? :- R5(X,Y), R3(Y,X).\n";

inline const char* kFig1Facts =
    "R1(a,b). R1(c,d). R2(e,g). R3(g,a). R3(g,h).\n";

inline std::vector<Tgd> fig1_tgds() { return parse_tgds(kFig1Tgds); }
inline ConjunctiveQuery fig1_query() { return parse_query(kFig1Query).disjuncts.front(); }
inline Database fig1_facts() { return parse_facts(kFig1Facts); }

}  // namespace tgdlog::test
