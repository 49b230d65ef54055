#include "w2s/cli.hpp"

int main(int argc, char** argv) { return w2s::dispatch(argc, argv); }
