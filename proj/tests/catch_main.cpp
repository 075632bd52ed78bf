// Catch2 amalgamated translation unit; supplies the test main.
#include <catch2/catch_amalgamated.cpp>
