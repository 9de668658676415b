#include <stdio.h>
#include "trainrec.h"

int main(void) {
    TrainrecSignal *signal = NULL;
    TrainrecCloud *cloud = NULL;
    TrainrecResult *result = NULL;
    double period = 0.0;

    if (trainrec_signal_chirp(1.0, &signal) != TRAINREC_STATUS_OK) return 1;
    if (trainrec_cloud_sample(signal, 0.39, 3, 4000, 0.02, TRAINREC_NOISE_GAUSSIAN, 0.0, 7, &cloud) != TRAINREC_STATUS_OK) return 2;
    TrainrecOptions options = trainrec_options_default();
    if (trainrec_reconstruct(cloud, 0.1, &options, &result) != TRAINREC_STATUS_OK) {
        fprintf(stderr, "%s\n", trainrec_last_error());
        return 3;
    }
    trainrec_result_period(result, &period);
    printf("%.6f\n", period);

    if (trainrec_signal_sine(1.0, 1.0, NULL) != TRAINREC_STATUS_NULL_POINTER) return 4;

    trainrec_result_free(result);
    trainrec_cloud_free(cloud);
    trainrec_signal_free(signal);
    return 0;
}
