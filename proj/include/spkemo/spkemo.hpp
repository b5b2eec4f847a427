#pragma once

#include "spkemo/audio_io.hpp"
#include "spkemo/classifiers.hpp"
#include "spkemo/embed.hpp"
#include "spkemo/embedding.hpp"
#include "spkemo/embedding_io.hpp"
#include "spkemo/emotion.hpp"
#include "spkemo/error.hpp"
#include "spkemo/evaluation.hpp"
#include "spkemo/matchscore.hpp"
#include "spkemo/pipeline.hpp"
#include "spkemo/svm.hpp"
#include "spkemo/svm_io.hpp"
#include "spkemo/synth.hpp"
