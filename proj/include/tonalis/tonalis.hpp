#pragma once

#include "tonalis/grammar.hpp"
#include "tonalis/keyscore.hpp"
#include "tonalis/modulation.hpp"
#include "tonalis/numeral.hpp"
#include "tonalis/pipeline.hpp"
#include "tonalis/pitch.hpp"
