package com.acme.io;

public class FileStore {
    private String root;

    void init() {
        root = "/tmp"; /* @sketchlink 0cafe0014-0000-4000-8000-000000000014 */ touch(root);
    }

    /**
     * Writes one entry.
     * @sketchlink 0cafe0015-0000-4000-8000-000000000015
     */
    void touch(String path) {
        System.out.println(path);
    }
}
