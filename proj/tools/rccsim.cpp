#include "rccsim/app.hpp"

int main(int argc, char** argv) { return rccsim::run_cli(argc, argv); }
