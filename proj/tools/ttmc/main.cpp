#include <iostream>

#include "app.hpp"

int main(int argc, char** argv) { return ttmc::run(argc, argv, std::cout, std::cerr); }
