package com.acme.service;

/** @sketchlink 0cafe001f-0000-4000-8000-00000000001f */
public record QueueEntry(String key, int weight) {

    /** @sketchlink 0cafe0020-0000-4000-8000-000000000020 */
    boolean heavy() {
        return weight > 10;
    }
}
