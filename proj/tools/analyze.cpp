#include "presym/report.hpp"

int main(int argc, char** argv) { return presym::cli_main(argc, argv); }
