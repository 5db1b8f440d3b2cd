#include "suite.hpp"

namespace ttm::oracle {

namespace {

// Wraps the events of module M into a complete model with v and b.
std::string wrap(const std::string& extra_types, const std::string& body, const std::string& tail = "") {
  return "type D = 0..3\ntype I = 0..1\n" + extra_types +
         "\nvariables\n  v : D = 0;\n  b : bool = false;\nend\n\n"
         "module M\n  interface\n    v : out D = 0;\n    b : out bool = false;\n" +
         body + "end\n\n" + (tail.empty() ? "instances\n  m = M(out v, out b)\nend\n\nsystem = m\n" : tail);
}

}  // namespace

const std::vector<SuiteModel>& suite_models() {
  static const std::vector<SuiteModel> models = {
      {"spontaneous", wrap("", R"(  events
    inc when v < 3 do v := v + 1 end
    reset when v == 3 do v := 0 end
    flip do b := !b end
)")},
      {"just", wrap("", R"(  events
    inc just when v < 3 do v := v + 1 end
    reset just when v == 3 do v := 0 end
    flip when v == 1 do b := !b end
)")},
      {"compassionate", wrap("", R"(  events
    inc compassionate when v < 3 && !b do v := v + 1 end
    reset just when v == 3 do v := 0 end
    flip just do b := !b end
)")},
      {"real_time", wrap("", R"(  events
    inc [1, 2] when v < 3 do v := v + 1 end
    reset [0, 1] when v == 3 do v := 0, b := !b end
    flip [0, *] when v == 2 do b := true end
)")},
      {"fair_index", wrap("", R"(  local
    w : array[I] of bool = false;
  events
    step(i : fair I) just when !w[i] do w[i] := true end
    inc when w[0] && w[1] && v < 3 do v := v + 1 end
    reset compassionate when v == 3 do v := 0, w[0] := false, w[1] := false end
    flip just when w[0] do b := !b end
)")},
      {"demonic_index", wrap("type C = 0..1\n", R"(  events
    inc just when v < 3 do v := v + 1 end
    reset just when v == 3 do v := 0 end
    flip(d : C) compassionate when v != 0 do b := d == 1 end
)")},
      {"timer", wrap("", R"(  timers
    t0 : 0..3;
  events
    inc just when v < 3 && t0 >= 1 start t0 do v := v + 1 end
    reset [0, 2] when v == 3 && t0 >= 2 start t0 do v := 0 end
    flip when t0 == 0 do b := !b end
)")},
      {"demonic_assignment", wrap("", R"(  events
    inc compassionate when v < 3 do v := v + 1 end
    reset just when v == 3 do v :: D end
    flip just when v == 2 do b :: {false, true} end
)")},
      {"queue", wrap("", R"(  local
    q : queue[D](2);
  events
    inc just when v < 3 && q.Count() < 2 do v := v + 1, q := q.Enqueue(v) end
    reset compassionate when q.Count() > 0 do v := q.First(), q := q.Dequeue() end
    flip [0, 2] when q.Count() == 2 do b := !b end
)")},
      {"synchronized",
       "type D = 0..3\n\nvariables\n  v : D = 0;\n  b : bool = false;\nend\n\n"
       "module CTR\n  interface\n    v : out D = 0;\n  events\n"
       "    step just when v < 3 do v := v + 1 end\n"
       "    reset [1, 2] when v == 3 do v := 0 end\nend\n\n"
       "module TOG\n  interface\n    b : out bool = false;\n    v : in D;\n  depends\n    c : CTR;\n  events\n"
       "    flip compassionate when v != 1 do b := !b end\n"
       "    tog_step sync c.step as inc do b := v' == 2 end\nend\n\n"
       "instances\n  ctr = CTR(out v);\n  tog = TOG(out b, in v) with c := ctr end;\n  grp ::= ctr || tog\nend\n\n"
       "system = grp\n"},
  };
  return models;
}

const std::vector<std::string>& suite_formulas() {
  static const std::vector<std::string> formulas = {
      "[](v <= 3)",
      "[](v < 3)",
      "<>(v == 3)",
      "[]<>(v == 0)",
      "<>[](v == 0)",
      "[](v == 3 => <>(v == 0))",
      "[]<>b",
      "<>[]!b",
      "(v == 0) U (v == 1)",
      "[](b => <>!b)",
      "[]<>inc",
      "<>inc",
      "[](inc => <>reset)",
      "[](v == 1 => ((v == 1) U (v == 2)))",
      "<>[](v != 3)",
      "[]<>(v == 2) || <>[]b",
      "[](!b U (b || v == 3))",
      "[]<>flip",
      "<>(v == 2 && b)",
      "[](v == 2 => <>(v == 3 || v == 0))",
  };
  return formulas;
}

}  // namespace ttm::oracle
