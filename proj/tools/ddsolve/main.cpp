#include "commands.hpp"

int main(int argc, char** argv) { return ddsolve::main_entry(argc, argv); }
