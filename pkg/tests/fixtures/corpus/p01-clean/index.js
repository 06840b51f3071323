const express = require('express');
const _ = require('lodash');
