package com.acme.model;

public class Customer {
    String name;

    /** @sketchlink 0cafe000d-0000-4000-8000-00000000000d */
    static class Address {
        String city;

        /** @sketchlink 0cafe000e-0000-4000-8000-00000000000e */
        String describe() {
            return city;
        }
    }
}
